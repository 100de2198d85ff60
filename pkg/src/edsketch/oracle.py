"""Brute-force ground truth: quadratic DPs and an exact window-mapping search.

Nothing here hashes or samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K
from .errors import TooLarge
from .tokens import as_tokens, dense_codes, occurrences

MAX_MAPPING_WINDOWS = 16


@dataclass
class OracleResult:
    value: int
    table: np.ndarray | None = None


def _pair(a, b):
    x, y = as_tokens(a).tokens, as_tokens(b).tokens
    (x, y), sigma = dense_codes(x, y)
    return x, y, sigma


def ed_exact(a, b, method: str = "bitparallel") -> int:
    """Edit distance (unit insert/delete/substitute).

    ``method`` picks the plain O(nm) table ("dp") or the bit-vector version.
    """
    x, y, sigma = _pair(a, b)
    if method == "dp":
        return int(K.ed_dp(x, y))
    if len(x) < len(y):
        x, y = y, x
    if len(y) == 0:
        return len(x)
    ptr, pos = occurrences(y, sigma)
    return int(K.ed_bitparallel(y, x, ptr, pos))


def lcs_exact(a, b, method: str = "bitparallel") -> int:
    x, y, sigma = _pair(a, b)
    if method == "dp":
        return int(K.lcs_dp(x, y))
    if len(x) == 0 or len(y) == 0:
        return 0
    ptr, pos = occurrences(x, sigma)
    return int(K.lcs_bitparallel(x, y, ptr, pos))


def ed_table(a, b) -> OracleResult:
    """Full (n+1) x (m+1) table, for debugging small inputs."""
    x, y = as_tokens(a).tokens, as_tokens(b).tokens
    n, m = len(x), len(y)
    D = np.zeros((n + 1, m + 1), dtype=np.int64)
    D[:, 0] = np.arange(n + 1)
    D[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            D[i, j] = min(D[i - 1, j] + 1, D[i, j - 1] + 1,
                          D[i - 1, j - 1] + (x[i - 1] != y[j - 1]))
    return OracleResult(int(D[n, m]), D)


def min_mapping_exact(cost: Callable[[int, int, int], float], a_lens, b_windows, n_b: int) -> int:
    """Minimum mapping cost over all monotone window mappings.

    ``cost(a, start, length)`` gives the learned cost (inf when absent),
    ``b_windows`` lists the candidate (start, length) B-windows. Monotone
    means matched starts and matched ends both never decrease. The search
    runs over (A-window, last matched B-window) states, so every mapping is
    covered; the penalty of a new window is computed from the positions it
    shares with or leaves open after the previous one. Transitions between
    all pairs of states are evaluated as one dense matrix per A-window.
    """
    a_lens = [int(x) for x in a_lens]
    if len(a_lens) > MAX_MAPPING_WINDOWS:
        raise TooLarge(f"{len(a_lens)} A-windows (limit {MAX_MAPPING_WINDOWS})")
    wins = sorted(set((int(s), int(ln)) for s, ln in b_windows))
    S = np.array([w[0] for w in wins], dtype=np.float64)
    E = np.array([w[0] + w[1] - 1 for w in wins], dtype=np.float64)
    # allowed[p, w]: window w may follow window p; pen[p, w]: positions left open or shared
    allowed = (S[None, :] >= S[:, None]) & (E[None, :] >= E[:, None])
    pen = np.where(S[None, :] > E[:, None], S[None, :] - E[:, None] - 1, E[:, None] - S[None, :] + 1)
    step = np.where(allowed, pen, np.inf)
    # state "nothing matched yet" kept apart from the per-window states
    none_val = 0.0
    V = np.full(len(wins), np.inf)
    for q, la in enumerate(a_lens):
        c = np.array([cost(q, s, ln) for s, ln in wins], dtype=np.float64)
        reach = none_val + S - 1
        if len(wins):
            reach = np.minimum(reach, (V[:, None] + step).min(axis=0))
        V = np.minimum(V + la, reach + c)
        none_val += la
    out = min(none_val + n_b, float((V + n_b - E).min()) if len(wins) else np.inf)
    return int(out)


def mapping_cost_bruteforce(cost, a_lens, b_windows, n_b: int) -> int:
    """Exhaustive enumeration of every monotone mapping (tiny inputs only).

    Each mapping's cost is taken straight from the definition with a
    per-position coverage count.
    """
    a_lens = [int(x) for x in a_lens]
    wins = sorted(set((int(s), int(ln)) for s, ln in b_windows))
    if (len(wins) + 1) ** len(a_lens) > 2_000_000:
        raise TooLarge("enumeration too large")
    INF = float("inf")
    best = INF

    def rec(q, chosen, acc, last):
        nonlocal best
        if acc >= best:
            return
        if q == len(a_lens):
            cover = np.zeros(n_b + 2, dtype=np.int64)
            for s, ln in chosen:
                cover[s] += 1
                cover[s + ln] -= 1
            pen = int(np.abs(np.cumsum(cover)[1:n_b + 1] - 1).sum())
            best = min(best, acc + pen)
            return
        rec(q + 1, chosen, acc + a_lens[q], last)
        for s, ln in wins:
            if last is not None and (s < last[0] or s + ln < last[0] + last[1]):
                continue
            c = cost(q, s, ln)
            if c == INF:
                continue
            rec(q + 1, chosen + [(s, ln)], acc + c, (s, ln))

    rec(0, [], 0, None)
    return int(best)
