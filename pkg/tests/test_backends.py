"""The compiled kernels and the pure-Python fallback must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import planted
from edsketch import _kernels as K
from edsketch.driver import ApproxConfig, approx_ed_noprep, approx_ed_prep
from edsketch.gap_single import gap_query, preprocess_single
from edsketch.hash_sketch import HashParams, build_sketch
from edsketch.oracle import ed_exact, lcs_exact
from edsketch.perm_lcs import preprocess_permutation, ulam_query
from edsketch.small_ed import ed_bounded_stats

COMPILED = K.compiled_table()
needs_compiled = pytest.mark.skipif(COMPILED is None, reason="compiled extensions not built")


@pytest.fixture
def python_backend(monkeypatch):
    def use():
        for name, fn in K.python_table().items():
            monkeypatch.setattr(K, name, fn)
    return use


def test_env_var_forces_fallback():
    env = dict(os.environ, EDSK_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from edsketch import _kernels as K; print(K.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_tables_cover_the_same_kernels():
    names = set(K.python_table())
    if COMPILED is not None:
        assert set(COMPILED) == names
    assert K.BACKEND in ("cython", "python")


def _csr(x, sigma):
    order = np.argsort(x, kind="stable")
    ptr = np.zeros(sigma + 2, dtype=np.int64)
    np.add.at(ptr, x.astype(np.int64) + 1, 1)
    return np.cumsum(ptr), order.astype(np.int64)


@needs_compiled
def test_raw_kernel_parity():
    P, C = K.python_table(), COMPILED
    rng = np.random.default_rng(1)
    base = 1234567891
    for it in range(120):
        na, nb = (int(v) for v in rng.integers(0, 120, 2))
        sig = int(rng.integers(1, 5))
        A = rng.integers(0, sig, na).astype(np.uint32)
        B = rng.integers(0, sig, nb).astype(np.uint32) if it % 2 else \
            np.concatenate([A[:na // 2], rng.integers(0, sig, 3), A[na // 2 + 2:]]).astype(np.uint32)
        nb = len(B)
        ref = P["ed_dp"](A, B)
        assert C["ed_dp"](A, B) == ref
        ptr, pos = _csr(A, sig)
        assert C["ed_bitparallel"](A, B, ptr, pos) == P["ed_bitparallel"](A, B, ptr, pos) == ref
        lcs = P["lcs_dp"](A, B)
        assert C["lcs_dp"](A, B) == lcs
        assert C["lcs_bitparallel"](A, B, ptr, pos) == P["lcs_bitparallel"](A, B, ptr, pos) == lcs
        n = max(na, nb)
        pw = C["powers"](base, n + 2)
        assert np.array_equal(pw, P["powers"](base, n + 2))
        pa, pb = C["prefix_hashes"](A, base), C["prefix_hashes"](B, base)
        assert np.array_equal(pa, P["prefix_hashes"](A, base))
        for L in (1, 3, 7):
            assert np.array_equal(C["window_hashes"](pa, pw, L), P["window_hashes"](pa, pw, L))
        for k in (0, 2, 5, 20):
            rc = C["wave_ed"](pa, pb, pw, na, nb, k, True)
            rp = P["wave_ed"](pa, pb, pw, na, nb, k, True)
            assert rc[:3] == rp[:3]
            assert np.array_equal(rc[3], rp[3])
        if na >= 8 and nb >= 8:
            m = min(na, nb) // 4
            a0 = np.arange(m, dtype=np.int64) * 4
            ln = np.full(m, 4, dtype=np.int64)
            b0 = rng.integers(0, nb, m).astype(np.int64)
            bl = np.minimum(rng.integers(1, 7, m), nb - b0).astype(np.int64)
            assert np.array_equal(C["window_ed_pairs"](A, B, sig, a0, ln, b0, bl),
                                  P["window_ed_pairs"](A, B, sig, a0, ln, b0, bl))


@needs_compiled
@pytest.mark.parametrize("seed", range(3))
def test_end_to_end_parity(seed, python_backend):
    rng = np.random.default_rng(seed)
    a, b = planted(600, 20, 4, rng)
    params = HashParams(seed)
    sa, sb = build_sketch(a, params), build_sketch(b, params)
    perm = rng.permutation(300) + 1
    perm2 = np.roll(perm, 7)
    gb = rng.integers(0, 4, 512)
    ga = gb.copy()
    ga[::97] = (ga[::97] + 1) % 4
    cfg = ApproxConfig(d=6, eps=0.25, seed=seed)

    def run():
        px, py = preprocess_permutation(perm, params), preprocess_permutation(perm2, params)
        u = ulam_query(px, py)
        w = ed_bounded_stats(sa, sb, 32, trace=True)
        g = gap_query(preprocess_single(gb, 8, seed=seed), ga, trace=True)
        pr = approx_ed_prep(a, b, cfg)
        nr = approx_ed_noprep(a, b, ApproxConfig(d=5, eps=0.25, seed=seed, fast_path=False))
        return (u.lcs, u.compares, w.distance, w.equal_calls, w.waves.tolist(), g.answer, g.probes,
                g.waves.tolist(), pr.estimate, pr.mapping, pr.budget, nr.estimate, nr.budget,
                ed_exact(a, b), lcs_exact(a, b), ed_exact(a, b, "dp"))

    fast = run()
    python_backend()
    assert run() == fast
