import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import planted, ref_ed
from edsketch.errors import DiagError, ParamError
from edsketch.gap_single import (MultiGapSketch, approx_equal, gap_query, preprocess_single,
                                 probe_ceiling, query_side, sample_indices)
from edsketch.hash_sketch import HashParams, build_sketch
from edsketch.small_ed import NEG, ed_bounded_stats


def test_k_equals_n():
    rng = np.random.default_rng(0)
    b = rng.integers(0, 4, 256)
    sb = preprocess_single(b.tolist(), 256, seed=1)
    expect = math.log(256) ** 2
    assert 0.5 * expect <= sb.S.size <= 2 * expect
    assert sb.shifted.shape == (2 * 256 + 1, sb.S.size + 1)


def test_sample_is_deterministic():
    s1, _ = sample_indices(5000, 500, seed=3)
    s2, _ = sample_indices(5000, 500, seed=3)
    s3, _ = sample_indices(5000, 500, seed=4)
    assert np.array_equal(s1, s2) and not np.array_equal(s1, s3)


def test_sample_size_band():
    S, _ = sample_indices(4096, 64, seed=7)
    expect = 4096 * math.log(4096) ** 2 / 64
    assert 0.5 * expect <= S.size <= 2 * expect
    assert np.all(np.diff(S) > 0) and S[0] >= 1 and S[-1] <= 4096


def test_k_range():
    with pytest.raises(ParamError):
        preprocess_single([1, 2, 3], 0, seed=0)
    with pytest.raises(ParamError):
        preprocess_single([1, 2, 3], 4, seed=0)


def test_approx_equal_cases():
    rng = np.random.default_rng(2)
    b = rng.integers(0, 4, 600)
    sb = preprocess_single(b.tolist(), 20, seed=5)
    S = sb.S
    qa = query_side(sb, b.tolist())
    assert approx_equal(qa, sb, 1, 0) == int(S.max())
    assert approx_equal(qa, sb, int(S.max()) + 1, 0) == int(S.max())
    # a mismatch at a sampled position stops the extension at its predecessor
    j = int(S[len(S) // 2])
    a = b.copy()
    a[j - 1] = 9
    qa = query_side(sb, a.tolist())
    assert approx_equal(qa, sb, 1, 0) == int(S[len(S) // 2 - 1])
    with pytest.raises(DiagError):
        approx_equal(qa, sb, 1, 21)


def test_length_mismatch():
    sb = preprocess_single([1, 2, 3, 4], 1, seed=0)
    with pytest.raises(ParamError):
        gap_query(sb, [1, 2, 3])


def test_yes_and_no_sides():
    rng = np.random.default_rng(11)
    n, k = 2048, 8
    b = rng.integers(0, 4, n)
    sb = preprocess_single(b.tolist(), k, seed=12)
    assert gap_query(sb, b.tolist()).yes
    a = b.copy()
    pos = rng.choice(n, size=k, replace=False)
    a[pos] = (a[pos] + 1) % 4
    assert gap_query(sb, a.tolist()).yes
    far = rng.integers(0, 1 << 20, n)
    sbf = preprocess_single(rng.integers(0, 1 << 20, n).tolist(), k, seed=12)
    v = gap_query(sbf, far.tolist())
    assert not v.yes and v.answer == "NO"
    assert v.approx_calls <= (2 * k + 1) * (k + 1)
    assert v.probes <= probe_ceiling(n, k)


@given(st.integers(0, 2**31), st.integers(1, 6))
def test_wave_domination(seed, k):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(40, 200))
    b = rng.integers(0, 3, n)
    a = b.copy()
    for p in rng.choice(n, size=int(rng.integers(0, 2 * k)), replace=False):
        a[p] = rng.integers(0, 3)
    params = HashParams(seed)
    exact = ed_bounded_stats(build_sketch(a.tolist(), params), build_sketch(b.tolist(), params),
                             k, trace=True).waves
    sb = preprocess_single(b.tolist(), k, seed=seed, c_s=0.3)
    approx = gap_query(sb, a.tolist(), trace=True).waves
    rows = min(exact.shape[0], approx.shape[0])
    mask = exact[:rows] != NEG
    assert np.all(approx[:rows][mask] >= exact[:rows][mask])


def test_completeness_small():
    # exact distance at most k always answers YES
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = planted(300, 4, 4, rng)
        if len(a) != len(b) or ref_ed(a.tolist(), b.tolist()) > 4:
            continue
        assert gap_query(preprocess_single(b.tolist(), 4, seed=1), a.tolist()).yes


def test_multi_gap_ladder():
    rng = np.random.default_rng(3)
    b = rng.integers(0, 4, 500)
    m = MultiGapSketch(b.tolist(), 16, seed=2)
    assert m.ks == [1, 2, 4, 8, 16]
    assert m.smallest_yes(b.tolist()) == 1
