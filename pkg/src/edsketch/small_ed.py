"""Exact bounded edit distance from two sketches.

The h-wave L^h(d) is the furthest row reachable on diagonal d with h edits.
Each wave extends the previous one by one edit on diagonals d-1, d, d+1 and
then slides along the diagonal with Equal, a longest-common-extension query
answered by doubling and bisection over prefix hashes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .budget import QueryBudget
from .errors import ExceedsThreshold, ParamError
from .hash_sketch import StringSketch, check_compatible, shared_powers

NEG = -(1 << 60)


@dataclass
class WaveResult:
    distance: int | ExceedsThreshold
    k: int
    equal_calls: int
    compares: int
    waves: np.ndarray | None = None  # shape (h+1, 2k+1), NEG where undefined

    @property
    def exceeded(self) -> bool:
        return isinstance(self.distance, ExceedsThreshold)


def equal(sa: StringSketch, sb: StringSketch, i: int, d: int) -> int:
    """Largest q >= i-1 with A[i..q] == B[i+d..q+d] (1-based)."""
    check_compatible(sa, sb)
    if i < 1 or i > sa.n or i + d < 1 or i + d > sb.n:
        return i - 1
    maxlen = min(sa.n - i + 1, sb.n - (i + d) + 1)
    w, _ = K.extend(sa.prefix, sb.prefix, shared_powers(sa, sb), i - 1, i + d - 1, maxlen)
    return i - 1 + int(w)


def ed_bounded_stats(sa: StringSketch, sb: StringSketch, k: int, trace: bool = False,
                     budget: QueryBudget | None = None) -> WaveResult:
    check_compatible(sa, sb)
    if k < 0:
        raise ParamError("k must be non-negative")
    if abs(sa.n - sb.n) > k:
        return WaveResult(ExceedsThreshold(k), k, 0, 0,
                          np.empty((0, 2 * k + 1), dtype=np.int64) if trace else None)
    dist, calls, cmp, waves = K.wave_ed(sa.prefix, sb.prefix, shared_powers(sa, sb),
                                        sa.n, sb.n, k, trace)
    if budget is not None:
        budget.charge_equal(calls, cmp)
    res = ExceedsThreshold(k) if dist < 0 else int(dist)
    return WaveResult(res, k, int(calls), int(cmp), waves)


def ed_bounded(sa: StringSketch, sb: StringSketch, k: int,
               budget: QueryBudget | None = None) -> int | ExceedsThreshold:
    """Exact ED(A, B) if it is at most k, else ExceedsThreshold(k)."""
    return ed_bounded_stats(sa, sb, k, budget=budget).distance


def ed_bounded_doubling(sa: StringSketch, sb: StringSketch, k_max: int | None = None,
                        budget: QueryBudget | None = None) -> int | ExceedsThreshold:
    """Try k = 1, 2, 4, ... until the distance is found or k_max is passed."""
    cap = max(sa.n, sb.n) if k_max is None else k_max
    k = 1
    while True:
        kk = min(k, cap)
        r = ed_bounded(sa, sb, kk, budget)
        if not isinstance(r, ExceedsThreshold) or kk >= cap:
            return r
        k *= 2
