"""Exact LCS of two permutations from their sketches.

X is parsed greedily into maximal blocks that also occur contiguously in Y;
the LCS is then the heaviest chain of blocks increasing in Y position. With
k = n - LCS there are O(k) blocks and each costs O(log n) hash comparisons.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .budget import QueryBudget
from .errors import CorruptSketch, NotPermutation, ParamMismatch
from .hash_sketch import HashParams, StringSketch, build_sketch, check_compatible
from .tokens import as_tokens


class Block(NamedTuple):
    x_start: int
    y_start: int
    weight: int


@dataclass
class PermSketch:
    sketch: StringSketch
    inv: np.ndarray  # inv[v-1] = 1-based position of symbol v
    _perm: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.sketch.n

    @property
    def perm(self) -> np.ndarray:
        """The permutation itself, recovered from inv when raw tokens are absent."""
        if self._perm is None:
            p = np.empty(self.n, dtype=np.int64)
            p[self.inv - 1] = np.arange(1, self.n + 1)
            self._perm = p
        return self._perm


@dataclass
class UlamResult:
    lcs: int
    blocks: list[Block]
    compares: int
    chain: list[Block] | None = None


def preprocess_permutation(p, params: HashParams, embed_raw: bool = True) -> PermSketch:
    p = as_tokens(p)
    n = len(p)
    vals = p.tokens.astype(np.int64)
    if n == 0 or vals.min() != 1 or vals.max() != n or np.unique(vals).size != n:
        raise NotPermutation("input is not a permutation of 1..n")
    inv = np.empty(n, dtype=np.int64)
    inv[vals - 1] = np.arange(1, n + 1)
    sk = build_sketch(p, params, embed_raw=embed_raw)
    return PermSketch(sk, inv, vals)


def _check(sx: PermSketch, sy: PermSketch) -> None:
    check_compatible(sx.sketch, sy.sketch)
    if sx.n != sy.n:
        raise ParamMismatch(f"permutation lengths differ: {sx.n} vs {sy.n}")


def compress(sx: PermSketch, sy: PermSketch, budget: QueryBudget | None = None) -> list[Block]:
    """Greedy maximal-block parse of X against Y (half-open blocks)."""
    return _compress(sx, sy, budget)[0]


def _compress(sx: PermSketch, sy: PermSketch, budget: QueryBudget | None):
    _check(sx, sy)
    n = sx.n
    px, py = sx.sketch.prefix, sy.sketch.prefix
    pw = sx.sketch.powers
    perm, inv = sx.perm, sy.inv
    blocks: list[Block] = []
    total = 0
    xs = 1
    while xs <= n:
        v = int(perm[xs - 1])
        if not 1 <= v <= n:
            raise CorruptSketch(f"symbol {v} of X is not in Y's index")
        ys = int(inv[v - 1])
        w, cmp = K.extend(px, py, pw, xs - 1, ys - 1, min(n - xs + 1, n - ys + 1))
        total += cmp
        if w < 1:
            raise CorruptSketch(f"symbol {v} does not match Y at position {ys}")
        blocks.append(Block(xs, ys, int(w)))
        xs += w
    if budget is not None:
        budget.charge_equal(len(blocks), total)
    return blocks, total


def his(blocks: list[Block], reconstruct: bool = False):
    """Heaviest chain of blocks with strictly increasing y_start.

    The frontier keeps (y, best weight ending at some y' <= y) pairs with both
    coordinates increasing; on equal weight the smaller y survives. Returns
    the weight, or (weight, chain) when reconstruct is set.
    """
    keys: list[int] = []
    weights: list[int] = []
    owner: list[int] = []
    back = [-1] * len(blocks)
    for idx, b in enumerate(blocks):
        pos = bisect.bisect_left(keys, b.y_start)
        best, pred = (weights[pos - 1], owner[pos - 1]) if pos else (0, -1)
        back[idx] = pred
        val = best + b.weight
        # entries at or after y_start that are no heavier are now dominated
        end = pos
        while end < len(keys) and weights[end] <= val:
            end += 1
        if end < len(keys) and keys[end] == b.y_start:
            continue  # a strictly heavier entry already sits at this key
        keys[pos:end] = [b.y_start]
        weights[pos:end] = [val]
        owner[pos:end] = [idx]
    total = weights[-1] if weights else 0
    if not reconstruct:
        return total
    chain = []
    cur = owner[-1] if owner else -1
    while cur >= 0:
        chain.append(blocks[cur])
        cur = back[cur]
    chain.reverse()
    return total, chain


def ulam_query(sx: PermSketch, sy: PermSketch, reconstruct: bool = False,
               budget: QueryBudget | None = None) -> UlamResult:
    blocks, cmp = _compress(sx, sy, budget)
    if reconstruct:
        lcs, chain = his(blocks, reconstruct=True)
        return UlamResult(lcs, blocks, cmp, chain)
    return UlamResult(his(blocks), blocks, cmp)


def ulam_lcs(sx: PermSketch, sy: PermSketch, budget: QueryBudget | None = None) -> int:
    return ulam_query(sx, sy, budget=budget).lcs
