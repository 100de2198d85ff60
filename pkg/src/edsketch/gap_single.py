"""Gap edit distance with only one string preprocessed.

B is sampled at a random index set S (rate about ln^2 n / k) and, for every
shift d in [-k, k], the sampled string B^d = b_{i1+d} b_{i2+d} ... is hashed.
At query time A is sampled at the same S and the wave recurrence is run with
Approx-Equal, which compares A_S against B^d instead of the full strings. The
verdict separates ED <= k (YES) from ED > 3k^2 (NO).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .budget import QueryBudget
from .errors import DiagError, ParamError
from .hash_sketch import HashParams, string_digest
from .tokens import SENTINEL, as_tokens

_RESAMPLE_TRIES = 64


def sample_rate(n: int, k: int, c_s: float = 1.0) -> float:
    return min(1.0, c_s * math.log(n) ** 2 / k) if n > 1 else 1.0


def sample_indices(n: int, k: int, seed: int, c_s: float = 1.0) -> tuple[np.ndarray, int]:
    """Draw S (1-based, sorted). Redraws until |S| is within [1/2, 2] of n*p.

    Returns (S, attempts). The draw is a pure function of (n, k, seed, c_s).
    """
    p = sample_rate(n, k, c_s)
    if p >= 1.0:
        return np.arange(1, n + 1, dtype=np.int64), 1
    expect = n * p
    S = None
    for attempt in range(_RESAMPLE_TRIES):
        rng = np.random.default_rng([int(seed), int(k), attempt, 0x5A])
        S = np.flatnonzero(rng.random(n) < p).astype(np.int64) + 1
        if 0.5 * expect <= S.size <= 2.0 * expect and S.size > 0:
            return S, attempt + 1
    if S.size == 0:
        S = np.array([n], dtype=np.int64)
    return S, _RESAMPLE_TRIES


def shifted_values(tokens: np.ndarray, S: np.ndarray, d: int) -> np.ndarray:
    """Symbol values of B^d: token+1 in range, the sentinel value outside."""
    n = tokens.shape[0]
    pos = S + d
    ok = (pos >= 1) & (pos <= n)
    vals = np.full(S.shape[0], SENTINEL + 1, dtype=np.uint64)
    vals[ok] = tokens[pos[ok] - 1].astype(np.uint64) + 1
    return vals


@dataclass
class SampledSketchB:
    params: HashParams
    n: int
    k: int
    c_s: float
    S: np.ndarray  # int64, 1-based sorted sample
    shifted: np.ndarray  # uint64 (2k+1, |S|+1): prefix hashes of B^d, row d+k
    string_id: int
    alphabet: str = "integer"
    attempts: int = 1
    _pw: np.ndarray | None = None

    @property
    def seed(self) -> int:
        return self.params.seed

    @property
    def powers(self) -> np.ndarray:
        if self._pw is None:
            self._pw = K.powers(self.params.base, self.S.shape[0] + 1)
        return self._pw

    def level_table(self, d: int, level: int) -> np.ndarray:
        """Sorted hashes of all length-2^level substrings of B^d."""
        row = self.shifted[d + self.k]
        return np.unique(K.window_hashes(np.ascontiguousarray(row), self.powers, 1 << level))


@dataclass
class QuerySide:
    """Prefix hashes of A restricted to the sample."""

    S: np.ndarray
    prefix: np.ndarray


@dataclass
class GapVerdict:
    answer: str  # "YES" or "NO"
    waves_used: int
    approx_calls: int
    probes: int
    waves: np.ndarray | None = None

    @property
    def yes(self) -> bool:
        return self.answer == "YES"


def preprocess_single(b, k: int, seed: int, c_s: float = 1.0) -> SampledSketchB:
    b = as_tokens(b)
    n = len(b)
    if n == 0 or not 1 <= k <= n:
        raise ParamError(f"k must lie in [1, n]; got k={k}, n={n}")
    params = HashParams(seed)
    S, attempts = sample_indices(n, k, params.seed, c_s)
    m = S.shape[0]
    shifted = np.empty((2 * k + 1, m + 1), dtype=np.uint64)
    for d in range(-k, k + 1):
        shifted[d + k] = K.prefix_hashes_values(shifted_values(b.tokens, S, d), params.base)
    return SampledSketchB(params, n, k, float(c_s), S, shifted, string_digest(b.tokens),
                          b.alphabet, attempts)


def query_side(sb: SampledSketchB, a) -> QuerySide:
    a = as_tokens(a)
    if len(a) != sb.n:
        raise ParamError(f"query length {len(a)} differs from sketched length {sb.n}")
    vals = a.tokens[sb.S - 1]
    return QuerySide(sb.S, K.prefix_hashes(np.ascontiguousarray(vals), sb.params.base))


def approx_equal(qa: QuerySide, sb: SampledSketchB, i: int, d: int) -> int:
    """Furthest sampled q reachable from n(i) with A_S and B^d agreeing.

    n(i) is the first sampled index >= i. Returns i-1 when no sampled index
    is left or the first sampled symbols already differ.
    """
    if not -sb.k <= d <= sb.k:
        raise DiagError(f"diagonal {d} outside [-{sb.k}, {sb.k}]")
    S = sb.S
    m = S.shape[0]
    p = int(np.searchsorted(S, i, side="left"))
    if p >= m:
        return i - 1
    w, _ = K.extend(qa.prefix, np.ascontiguousarray(sb.shifted[d + sb.k]), sb.powers, p, p, m - p)
    return int(S[p + w - 1]) if w > 0 else i - 1


def gap_query(sb: SampledSketchB, a, trace: bool = False,
              budget: QueryBudget | None = None) -> GapVerdict:
    qa = a if isinstance(a, QuerySide) else query_side(sb, a)
    h, calls, probes, waves = K.approx_wave(sb.S, qa.prefix, sb.shifted, sb.powers,
                                            sb.n, sb.n, sb.k, trace)
    if budget is not None:
        budget.charge_equal(int(calls), int(probes))
    if h >= 0:
        return GapVerdict("YES", int(h), int(calls), int(probes), waves)
    return GapVerdict("NO", sb.k + 1, int(calls), int(probes), waves)


def probe_ceiling(n: int, k: int, c: float = 4.0) -> float:
    """c * n/k * ln^2 n, the sampled-table probe allowance per query."""
    return c * n / k * math.log(n) ** 2


class MultiGapSketch:
    """Geometric ladder of gap sketches (k = 1, 2, 4, ..., k_max)."""

    def __init__(self, b, k_max: int, seed: int, c_s: float = 1.0):
        b = as_tokens(b)
        self.ks = []
        k = 1
        while k <= min(k_max, len(b)):
            self.ks.append(k)
            k *= 2
        self.sketches = {k: preprocess_single(b, k, seed, c_s) for k in self.ks}

    def smallest_yes(self, a) -> int | None:
        """Smallest ladder k answering YES, or None."""
        for k in self.ks:
            if gap_query(self.sketches[k], a).yes:
                return k
        return None
