"""Window contexts, close-window graphs and the learned cost function E.

All window indices here are 0-based positions in a WindowSet; window starts
inside a WindowSet stay 1-based.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .budget import QueryBudget
from .tokens import dense_codes
from .windows import TauLevel, WindowSet

INF = math.inf


def threshold(tau: float, d: int, mult: float = 1.0) -> int:
    """Largest integer distance allowed by the bound ED <= mult * tau * d."""
    return int(math.floor(mult * tau * d + 1e-9))


@dataclass
class Family:
    level: TauLevel
    windows: WindowSet

    @property
    def size(self) -> int:
        return len(self.windows)


class WindowContext:
    """Both strings coded over one dense alphabet, plus their window sets.

    Every pairwise window distance goes through this object so that it can
    be charged to the right counter.
    """

    def __init__(self, A: np.ndarray, B: np.ndarray, awin: WindowSet,
                 families: dict[int, Family], d: int, budget: QueryBudget | None = None):
        (self.A, self.B), self.sigma = dense_codes(A, B)
        self.awin = awin
        self.families = families
        self.d = d
        self.budget = budget if budget is not None else QueryBudget()
        self._a0 = np.ascontiguousarray(awin.starts - 1, dtype=np.int64)
        self._alen = np.ascontiguousarray(awin.lens, dtype=np.int64)
        self._graphs: dict[tuple, CloseGraph] = {}

    @property
    def n_a(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_b(self) -> int:
        return int(self.B.shape[0])

    def _pairs(self, X, Y, xs, xl, ys, yl) -> np.ndarray:
        if len(xs) == 0:
            return np.empty(0, dtype=np.int64)
        return K.window_ed_pairs(X, Y, self.sigma, np.ascontiguousarray(xs, dtype=np.int64),
                                 np.ascontiguousarray(xl, dtype=np.int64),
                                 np.ascontiguousarray(ys, dtype=np.int64),
                                 np.ascontiguousarray(yl, dtype=np.int64))

    def ed_ab(self, a_idx, tau_index: int, b_idx, prep: bool = False,
              charge: bool = True) -> np.ndarray:
        """Exact distances of (A-window, B^tau-window) pairs, charged per pair.

        With charge=False the caller is responsible for charging the pairs it
        actually consumes.
        """
        a_idx = np.asarray(a_idx, dtype=np.int64)
        b_idx = np.asarray(b_idx, dtype=np.int64)
        a_idx, b_idx = np.broadcast_arrays(a_idx, b_idx)
        fam = self.families[tau_index].windows
        if charge:
            self.budget.charge_windows(int(a_idx.size), tau_index, prep=prep)
        return self._pairs(self.A, self.B, self._a0[a_idx], self._alen[a_idx],
                           fam.starts[b_idx] - 1, fam.lens[b_idx])

    def window_distance(self, a: int, tau_index: int, b: int) -> int:
        """Uncharged distance of one pair (used for lookups of paid-for blocks)."""
        fam = self.families[tau_index].windows
        return int(self._pairs(self.A, self.B, self._a0[[a]], self._alen[[a]],
                               fam.starts[[b]] - 1, fam.lens[[b]])[0])

    def ed_aa(self, u: int, v_idx, tau_index: int | None = None) -> np.ndarray:
        v_idx = np.asarray(v_idx, dtype=np.int64)
        self.budget.charge_windows(int(v_idx.size), tau_index, prep=True)
        return self._pairs(self.A, self.A, np.full(v_idx.size, self._a0[u]),
                           np.full(v_idx.size, self._alen[u]), self._a0[v_idx], self._alen[v_idx])

    def ed_bb(self, tau_index: int, u: int, v_idx, prep: bool = True) -> np.ndarray:
        fam = self.families[tau_index].windows
        v_idx = np.asarray(v_idx, dtype=np.int64)
        self.budget.charge_windows(int(v_idx.size), tau_index, prep=prep)
        return self._pairs(self.B, self.B, np.full(v_idx.size, fam.starts[u] - 1),
                           np.full(v_idx.size, fam.lens[u]), fam.starts[v_idx] - 1, fam.lens[v_idx])

    def graph(self, side: str, radius: int, tau_index: int | None = None) -> "CloseGraph":
        """Close-window graph over the A windows or one B^tau family (memoized)."""
        key = (side, radius, tau_index)
        g = self._graphs.get(key)
        if g is None:
            size = len(self.awin) if side == "A" else self.families[tau_index].size
            g = CloseGraph(self, side, radius, tau_index, size)
            self._graphs[key] = g
        return g


class CloseGraph:
    """G_{C,r}: windows adjacent when their distance is at most ``radius``.

    Neighbor lists are materialized per vertex on first use and memoized;
    their cost is charged to the preprocessing counters.
    """

    def __init__(self, ctx: WindowContext, side: str, radius: int, tau_index: int | None, size: int):
        self.ctx = ctx
        self.side = side
        self.radius = radius
        self.tau_index = tau_index
        self.size = size
        self._adj: dict[int, np.ndarray] = {}

    def neighbors(self, v: int) -> np.ndarray:
        got = self._adj.get(v)
        if got is None:
            allv = np.arange(self.size, dtype=np.int64)
            if self.side == "A":
                dist = self.ctx.ed_aa(v, allv, self.tau_index)
            else:
                dist = self.ctx.ed_bb(self.tau_index, v, allv, prep=True)
            got = allv[dist <= self.radius]
            self._adj[v] = got
        return got

    def materialize(self) -> None:
        for v in range(self.size):
            self.neighbors(v)

    @property
    def materialized(self) -> dict[int, np.ndarray]:
        return self._adj

    def load(self, adj: dict[int, np.ndarray]) -> None:
        self._adj.update(adj)


@dataclass
class Anchor:
    tau_index: int
    cost: int
    a0: int  # the anchor A-window (prep) or -1 (noprep)
    b0: int  # the anchor B-window
    a_members: np.ndarray
    b_members: np.ndarray


@dataclass
class LazyBlock:
    """A-windows times a union of B-window index ranges of one family.

    Stands for every pair with E = exact distance when it is within ``thr``
    and infinity otherwise. Distances are evaluated on demand.
    """

    tau_index: int
    a_ids: np.ndarray
    ranges: list[tuple[int, int]]  # half-open index ranges into the family
    thr: int


@dataclass
class EstimateMap:
    """Learned upper bounds E(a, b) on window distances.

    Three kinds of entries: direct (exact distances found by sampling),
    dense anchors (a fixed cost over a product of two neighbor sets) and
    lazy exhaustive blocks. Anything else is infinity.
    """

    ctx: WindowContext
    direct: dict[int, dict[tuple[int, int], int]] = field(default_factory=lambda: defaultdict(dict))
    anchors: list[Anchor] = field(default_factory=list)
    blocks: list[LazyBlock] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    _a_anchor: dict | None = None
    _a_block: dict | None = None

    def add_direct(self, tau_index: int, a_ids, b_ids, costs) -> None:
        table = self.direct[tau_index]
        for a, b, c in zip(np.asarray(a_ids).tolist(), np.asarray(b_ids).tolist(),
                           np.asarray(costs).tolist()):
            old = table.get((a, b))
            if old is None or c < old:
                table[(a, b)] = c

    def add_anchor(self, anchor: Anchor) -> None:
        self.anchors.append(anchor)
        self._a_anchor = None

    def add_block(self, block: LazyBlock) -> None:
        if len(block.a_ids) and block.ranges:
            self.blocks.append(block)
            self._a_block = None

    def merge(self, other: "EstimateMap") -> None:
        """Pointwise minimum with another map over the same context."""
        for tau, table in other.direct.items():
            mine = self.direct[tau]
            for key, c in table.items():
                if key not in mine or c < mine[key]:
                    mine[key] = c
        for anc in other.anchors:
            self.add_anchor(anc)
        for blk in other.blocks:
            self.add_block(blk)
        for k, v in other.flags.items():
            mine = self.flags.get(k)
            if isinstance(v, bool):
                self.flags[k] = bool(mine) or v
            elif isinstance(v, list) and isinstance(mine, list):
                self.flags[k] = mine + [x for x in v if x not in mine]
            elif isinstance(v, dict) and isinstance(mine, dict):
                self.flags[k] = {**mine, **v}
            else:
                self.flags[k] = v

    def _index(self):
        if self._a_anchor is None:
            idx = defaultdict(list)
            for g, anc in enumerate(self.anchors):
                for a in anc.a_members.tolist():
                    idx[a].append(g)
            self._a_anchor = idx
        if self._a_block is None:
            idx = defaultdict(list)
            for bi, blk in enumerate(self.blocks):
                for a in blk.a_ids.tolist():
                    idx[a].append(bi)
            self._a_block = idx
        return self._a_anchor, self._a_block

    def lookup_family(self, a: int, tau_index: int, b: int) -> float:
        """E restricted to one family: min over its direct, anchor and block entries."""
        best = INF
        c = self.direct.get(tau_index, {}).get((a, b))
        if c is not None:
            best = c
        anc_idx, blk_idx = self._index()
        for g in anc_idx.get(a, ()):
            anc = self.anchors[g]
            if anc.tau_index == tau_index and anc.cost < best:
                pos = np.searchsorted(anc.b_members, b)
                if pos < anc.b_members.size and anc.b_members[pos] == b:
                    best = anc.cost
        for bi in blk_idx.get(a, ()):
            blk = self.blocks[bi]
            if blk.tau_index != tau_index:
                continue
            if best > 0 and any(lo <= b < hi for lo, hi in blk.ranges):
                # already paid for when the block was created
                dist = int(self.ctx.window_distance(a, tau_index, b))
                if dist <= blk.thr and dist < best:
                    best = dist
        return best

    def lookup(self, a: int, start: int, length: int) -> float:
        """E(a, B[start .. start+length-1]) merged over every family holding that window."""
        best = INF
        for tau_index, fam in self.ctx.families.items():
            w = fam.windows
            lo = np.searchsorted(w.starts, start, side="left")
            hi = np.searchsorted(w.starts, start, side="right")
            for b in range(lo, hi):
                if w.lens[b] == length:
                    best = min(best, self.lookup_family(a, tau_index, int(b)))
        return best

    def finite_entries(self, limit: int | None = None, rng: np.random.Generator | None = None):
        """Yield (a, tau_index, b, cost, kind) for finite entries.

        With ``limit`` and ``rng`` the block and anchor products are sampled
        instead of enumerated.
        """
        for tau, table in self.direct.items():
            for (a, b), c in table.items():
                yield a, tau, b, c, "direct"
        for anc in self.anchors:
            pairs = anc.a_members.size * anc.b_members.size
            if limit is not None and rng is not None and pairs > limit:
                ai = rng.choice(anc.a_members, size=limit)
                bi = rng.choice(anc.b_members, size=limit)
                it = zip(ai.tolist(), bi.tolist())
            else:
                it = ((a, b) for a in anc.a_members.tolist() for b in anc.b_members.tolist())
            for a, b in it:
                yield a, anc.tau_index, b, anc.cost, "dense"
        for blk in self.blocks:
            b_all = np.concatenate([np.arange(lo, hi) for lo, hi in blk.ranges])
            if limit is not None and rng is not None and blk.a_ids.size * b_all.size > limit:
                ai = rng.choice(blk.a_ids, size=limit)
                bi = rng.choice(b_all, size=limit)
            else:
                ai = np.repeat(blk.a_ids, b_all.size)
                bi = np.tile(b_all, blk.a_ids.size)
            dist = self.ctx._pairs(self.ctx.A, self.ctx.B, self.ctx._a0[ai], self.ctx._alen[ai],
                                   self.ctx.families[blk.tau_index].windows.starts[bi] - 1,
                                   self.ctx.families[blk.tau_index].windows.lens[bi])
            for a, b, c in zip(ai.tolist(), bi.tolist(), dist.tolist()):
                if c <= blk.thr:
                    yield a, blk.tau_index, b, c, "block"


def range_size(ranges: list[tuple[int, int]]) -> int:
    return sum(hi - lo for lo, hi in ranges)


def merge_ranges(ranges) -> list[tuple[int, int]]:
    out: list[list[int]] = []
    for lo, hi in sorted(ranges):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def intersect_ranges(x, y) -> list[tuple[int, int]]:
    out, i, j = [], 0, 0
    while i < len(x) and j < len(y):
        lo, hi = max(x[i][0], y[j][0]), min(x[i][1], y[j][1])
        if lo < hi:
            out.append((lo, hi))
        if x[i][1] < y[j][1]:
            i += 1
        else:
            j += 1
    return out


def ranges_to_indices(ranges) -> np.ndarray:
    if not ranges:
        return np.empty(0, dtype=np.int64)
    return np.concatenate([np.arange(lo, hi, dtype=np.int64) for lo, hi in ranges])


def sample_from_ranges(ranges, m: int, rng: np.random.Generator) -> np.ndarray:
    """m uniform draws (with replacement) from the union of index ranges."""
    sizes = np.array([hi - lo for lo, hi in ranges], dtype=np.int64)
    cum = np.cumsum(sizes)
    u = rng.integers(0, int(cum[-1]), size=m)
    which = np.searchsorted(cum, u, side="right")
    offs = u - np.concatenate(([0], cum[:-1]))[which]
    los = np.array([lo for lo, _ in ranges], dtype=np.int64)
    return los[which] + offs
