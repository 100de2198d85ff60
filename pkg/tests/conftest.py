"""Shared helpers: independent reference implementations and instance builders.

The references here deliberately avoid the package's kernels so that they can
serve as a second route to every expected value.
"""

from __future__ import annotations

import bisect

import numpy as np
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

MOD = (1 << 61) - 1

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


def ref_ed(a, b) -> int:
    """Textbook quadratic edit distance on Python lists."""
    a, b = list(a), list(b)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def ref_lcs(a, b) -> int:
    a, b = list(a), list(b)
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def ref_perm_lcs(x, y) -> int:
    """LCS of two permutations as a longest increasing subsequence (patience sorting)."""
    where = {v: i for i, v in enumerate(y)}
    tails: list[int] = []
    for v in x:
        p = where[v]
        k = bisect.bisect_left(tails, p)
        if k == len(tails):
            tails.append(p)
        else:
            tails[k] = p
    return len(tails)


def ref_hash(tokens, base: int) -> int:
    """Polynomial hash with symbol offset 1, evaluated with Python integers."""
    h = 0
    for t in tokens:
        h = (h * base + int(t) + 1) % MOD
    return h


def planted(n: int, e: int, sigma: int, rng: np.random.Generator):
    """A random string over sigma symbols and a copy with e random edits."""
    a = rng.integers(0, sigma, n).astype(np.int64)
    b = a.tolist()
    for _ in range(e):
        op = int(rng.integers(3))
        p = int(rng.integers(0, max(1, len(b))))
        if op == 0 and b:
            b[p] = int(rng.integers(0, sigma))
        elif op == 1 or not b:
            b.insert(p, int(rng.integers(0, sigma)))
        else:
            del b[p]
    return a.astype(np.uint32), np.asarray(b, dtype=np.uint32)


def block_moves(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Identity permutation of 1..n with m random cut-and-paste moves."""
    p = list(range(1, n + 1))
    for _ in range(m):
        ln = int(rng.integers(1, max(2, n // 16)))
        s = int(rng.integers(0, n - ln + 1))
        seg = p[s:s + ln]
        del p[s:s + ln]
        t = int(rng.integers(0, len(p) + 1))
        p[t:t] = seg
    return np.asarray(p, dtype=np.int64)


def ref_ed_batch(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Row-by-row quadratic DP over a batch: X is (N, m), Y is (N, l)."""
    N, m = X.shape
    l = Y.shape[1]
    prev = np.tile(np.arange(l + 1, dtype=np.int64), (N, 1))
    for i in range(1, m + 1):
        cur = np.empty_like(prev)
        cur[:, 0] = i
        for j in range(1, l + 1):
            sub = prev[:, j - 1] + (X[:, i - 1] != Y[:, j - 1])
            cur[:, j] = np.minimum(np.minimum(prev[:, j], cur[:, j - 1]) + 1, sub)
        prev = cur
    return prev[:, l]


def window_distances(A, B, a_starts, a_lens, b_starts, b_lens) -> np.ndarray:
    """Reference distances of many (A-window, B-window) pairs, 1-based starts."""
    A, B = np.asarray(A), np.asarray(B)
    a_starts, a_lens = np.asarray(a_starts), np.asarray(a_lens)
    b_starts, b_lens = np.asarray(b_starts), np.asarray(b_lens)
    out = np.empty(a_starts.shape[0], dtype=np.int64)
    keys = a_lens * 100003 + b_lens
    for key in np.unique(keys):
        idx = np.flatnonzero(keys == key)
        m, l = int(a_lens[idx[0]]), int(b_lens[idx[0]])
        X = A[(a_starts[idx] - 1)[:, None] + np.arange(m)]
        Y = B[(b_starts[idx] - 1)[:, None] + np.arange(l)]
        out[idx] = ref_ed_batch(X, Y)
    return out


def entry_table(E, limit=None, rng=None):
    """Finite entries of an EstimateMap as parallel arrays plus their window geometry."""
    rows = list(E.finite_entries(limit, rng))
    if not rows:
        return None
    q, ti, bi, cost = (np.array(c, dtype=np.int64) for c in list(zip(*rows))[:4])
    kind = np.array([r[4] for r in rows])
    ctx = E.ctx
    bs = np.empty_like(bi)
    bl = np.empty_like(bi)
    for t in np.unique(ti):
        sel = ti == t
        w = ctx.families[int(t)].windows
        bs[sel], bl[sel] = w.starts[bi[sel]], w.lens[bi[sel]]
    return dict(q=q, ti=ti, bi=bi, cost=cost, kind=kind,
                a_start=ctx.awin.starts[q], a_len=ctx.awin.lens[q], b_start=bs, b_len=bl)
