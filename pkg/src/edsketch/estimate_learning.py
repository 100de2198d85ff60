"""Learning the window cost function E for one threshold tau.

Two learners share the same building blocks:

* ``learn_estimates_prep`` uses close-window graphs built during
  preprocessing. Sampled A-windows with many close B-windows are dense and
  are covered in bulk through the triangle inequality (cost 7*tau*d); sparse
  samples narrow down which B-windows stay relevant for their interval, and
  the procedure recurses on finer intervals.
* ``learn_estimates_noprep`` first splits the A-windows into sparse and bad
  ones by sampling, then repeatedly finds B-windows with many bad neighbors
  and covers those neighborhoods (cost 3*tau*d), and finally runs the same
  interval recursion on the sparse windows.

When sampling would not be cheaper than scanning, a learner falls back to an
exhaustive lazy block (exact distances within tau*d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimates import (Anchor, EstimateMap, LazyBlock, WindowContext, intersect_ranges,
                        merge_ranges, range_size, ranges_to_indices, sample_from_ranges,
                        threshold)

_MASK64 = (1 << 64) - 1
_CHUNK = 1 << 20


@dataclass
class LearnConfig:
    eps: float = 0.1
    c_s: float = 1.0
    seed: int = 0
    dense_cap_factor: float = 2.0
    max_levels: int | None = None
    samples: int | None = None  # fixes the log^2 n sample count (scaling runs)

    def levels(self) -> int:
        return self.max_levels if self.max_levels is not None else math.ceil(1 / self.eps) + 1

    def sample_count(self, n: int) -> int:
        return self.samples if self.samples is not None else log2n_samples(n, self.c_s)


def log2n_samples(n: int, c_s: float = 1.0) -> int:
    """The ``log^2 n`` sample count: ceil(c_s * ln^2 n), at least 1."""
    return max(1, math.ceil(c_s * math.log(max(n, 2)) ** 2 - 1e-9))


def derive_rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & _MASK64, *[int(t) for t in tags]])


def partition(n: int, count: int) -> list[tuple[int, int]]:
    """Split [1, n] into ``count`` contiguous near-equal intervals."""
    count = max(1, min(int(count), n))
    cuts = [(p * n) // count for p in range(count + 1)]
    return [(cuts[p] + 1, cuts[p + 1]) for p in range(count) if cuts[p + 1] > cuts[p]]


class _Geometry:
    """Interval bookkeeping for one tau family at one recursion level."""

    def __init__(self, ctx: WindowContext, tau_index: int, count: int, eps: float):
        self.fam = ctx.families[tau_index]
        self.starts = self.fam.windows.starts
        self.h = int(self.fam.windows.lens.max()) if self.fam.size else 1
        self.n_b = ctx.n_b
        self.intervals = partition(ctx.n_a, count)
        xs = np.array([x for x, _ in self.intervals], dtype=np.float64)
        ys = np.array([y for _, y in self.intervals], dtype=np.float64)
        center = (xs + ys) / 2.0
        half = (ys - xs + 1) / (2.0 * eps)
        self.exp_lo = np.clip(np.floor(center - half), 1, self.n_b).astype(np.int64)
        self.exp_hi = np.clip(np.ceil(center + half), 1, self.n_b).astype(np.int64)
        a_starts = ctx.awin.starts
        self.a_lo = np.searchsorted(a_starts, xs, side="left")
        self.a_hi = np.searchsorted(a_starts, ys, side="right")

    def relevant_from(self, neighbors: np.ndarray, rel: list[tuple[int, int]]) -> list[tuple[int, int]]:
        """Union of the B-intervals that contain any of the given B-windows, within rel."""
        if neighbors.size == 0:
            return []
        w = self.fam.windows
        s = w.starts[neighbors]
        e = s + w.lens[neighbors] - 1
        k1 = np.searchsorted(self.exp_hi, s, side="left")
        k2 = np.searchsorted(self.exp_lo, e, side="right") - 1
        ok = k1 <= k2
        k1, k2 = k1[ok], k2[ok]
        lo = np.searchsorted(self.starts, self.exp_lo[k1] - self.h + 1, side="left")
        hi = np.searchsorted(self.starts, self.exp_hi[k2], side="right")
        return intersect_ranges(merge_ranges(zip(lo.tolist(), hi.tolist())), rel)


def _exhaust(E: EstimateMap, ctx: WindowContext, tau_index: int, a_ids, rel, thr: int) -> None:
    a_ids = np.asarray(a_ids, dtype=np.int64)
    if a_ids.size == 0 or not rel:
        return
    ctx.budget.charge_windows(int(a_ids.size) * range_size(rel), tau_index)
    E.add_block(LazyBlock(tau_index, np.sort(a_ids), list(rel), thr))


def _full_neighborhood(E: EstimateMap, ctx: WindowContext, tau_index: int, a: int, rel, thr: int):
    """Query a against every relevant window; record and return its tau-neighbors."""
    b = ranges_to_indices(rel)
    dist = ctx.ed_ab(np.full(b.size, a), tau_index, b)
    hit = dist <= thr
    E.add_direct(tau_index, np.full(int(hit.sum()), a), b[hit], dist[hit])
    return b[hit]


def _groups(ids: np.ndarray, rel_of: np.ndarray):
    """Split window ids by their relevant-set id (stable)."""
    if ids.size == 0:
        return []
    keys = rel_of[ids]
    order = np.argsort(keys, kind="stable")
    ids, keys = ids[order], keys[order]
    cuts = np.flatnonzero(np.diff(keys)) + 1
    return [(int(k[0]), g) for k, g in zip(np.split(keys, cuts), np.split(ids, cuts))]


def _sparse_recursion(E: EstimateMap, ctx: WindowContext, tau_index: int, cfg: LearnConfig,
                      active: np.ndarray, rel_sets: list, rel_of: np.ndarray, L: int, thr: int,
                      first_exp: float, tag: int, dense_step=None) -> None:
    """Interval recursion shared by both learners.

    At level l the span is cut into t_tau^(first_exp + l*eps) intervals. An
    interval group with few windows is matched exhaustively against its
    relevant windows; otherwise up to L sparse samples get their full relevant
    neighborhoods, which define the (narrower) relevant set of the rest.
    ``dense_step`` (prep only) runs the seed sampling of Step B first and
    returns the windows found sparse.
    """
    t_tau = ctx.families[tau_index].size
    eps = cfg.eps
    level = 0
    while active.size:
        count = math.ceil(t_tau ** (first_exp + level * eps))
        geo = _Geometry(ctx, tau_index, count, eps)
        last = level >= cfg.levels()
        nxt = []
        for p in range(len(geo.intervals)):
            in_p = active[(active >= geo.a_lo[p]) & (active < geo.a_hi[p])]
            for rid, members in _groups(in_p, rel_of):
                rel = rel_sets[rid]
                if not rel:
                    continue
                rng = derive_rng(cfg.seed, tag, tau_index, level, p, rid)
                if dense_step is not None:
                    members = members[~dense_step.covered[members]]
                if members.size == 0:
                    continue
                if members.size < L or last:
                    _exhaust(E, ctx, tau_index, members, rel, thr)
                    if dense_step is not None:
                        dense_step.covered[members] = True
                    continue
                if dense_step is not None:
                    sparse = dense_step.run(members, rel, rng)
                    if dense_step.capped:
                        rest = members[~dense_step.covered[members]]
                        _exhaust(E, ctx, tau_index, rest, rel, thr)
                        dense_step.covered[rest] = True
                        continue
                else:
                    sparse = members
                if sparse.size == 0:
                    continue  # nothing sparse left to narrow with: the rest stay unmatched
                picks = rng.choice(sparse, size=min(L, sparse.size), replace=False)
                neigh = [_full_neighborhood(E, ctx, tau_index, int(a), rel, thr) for a in picks]
                new_rel = geo.relevant_from(np.concatenate(neigh), rel)
                rest = np.setdiff1d(members, picks)
                if dense_step is not None:
                    dense_step.covered[picks] = True
                    rest = rest[~dense_step.covered[rest]]
                if rest.size and new_rel:
                    rel_sets.append(new_rel)
                    rel_of[rest] = len(rel_sets) - 1
                    nxt.append(rest)
        active = np.sort(np.concatenate(nxt)) if nxt else np.empty(0, dtype=np.int64)
        level += 1


class _PrepDenseStep:
    """Step B seed sampling plus Step C dense coverage for the prep learner."""

    def __init__(self, E: EstimateMap, ctx: WindowContext, tau_index: int, cfg: LearnConfig,
                 L: int, thr: int, t_tau: int):
        self.E, self.ctx, self.tau_index, self.cfg = E, ctx, tau_index, cfg
        self.L, self.thr, self.t_tau = L, thr, t_tau
        tau, d = ctx.families[tau_index].level.tau, ctx.d
        self.cost = threshold(tau, d, 7.0)
        self.ga = ctx.graph("A", threshold(tau, d, 2.0), tau_index)
        self.gb = ctx.graph("B", threshold(tau, d, 4.0), tau_index)
        self.covered = np.zeros(len(ctx.awin), dtype=bool)
        self.runs = 0
        self.cap = cfg.dense_cap_factor * t_tau ** (2.0 / 3.0)
        self.capped = False

    def run(self, members: np.ndarray, rel, rng: np.random.Generator) -> np.ndarray:
        """Visit members in random order; return the windows declared sparse."""
        L, thr = self.L, self.thr
        rel_size = range_size(rel)
        m = math.ceil(L * rel_size / self.t_tau ** (1.0 / 3.0))
        full = m >= rel_size
        rel_idx = ranges_to_indices(rel) if full else None
        sparse: list[int] = []
        consec = 0
        for a in rng.permutation(members).tolist():
            if self.covered[a]:
                consec += 1
            else:
                b = rel_idx if full else sample_from_ranges(rel, m, rng)
                dist = self.ctx.ed_ab(np.full(b.size, a), self.tau_index, b)
                hits = dist <= thr
                score = hits.sum() * (m / rel_size if full else 1.0)
                if score > L / 2:
                    if self.runs >= self.cap:
                        self.capped = True
                        self.E.flags["dense_cap_hit"] = True
                        return np.asarray(sparse, dtype=np.int64)
                    self.runs += 1
                    hb, hd = b[hits], dist[hits]
                    b0 = int(hb[np.lexsort((hb, hd))[0]])
                    a_mem = self.ga.neighbors(a)
                    b_mem = self.gb.neighbors(b0)
                    self.E.add_anchor(Anchor(self.tau_index, self.cost, a, b0, a_mem, b_mem))
                    self.covered[a_mem] = True
                    consec = 0
                else:
                    sparse.append(a)
                    consec = consec + 1 if len(sparse) >= L else 0
            if consec >= L:
                break
        return np.asarray(sparse, dtype=np.int64)


def learn_estimates_prep(ctx: WindowContext, tau_index: int, cfg: LearnConfig,
                         E: EstimateMap | None = None) -> EstimateMap:
    E = E if E is not None else EstimateMap(ctx)
    fam = ctx.families[tau_index]
    t, t_tau = len(ctx.awin), fam.size
    L = cfg.sample_count(max(ctx.n_a, ctx.n_b))
    thr = threshold(fam.level.tau, ctx.d)
    everything = [(0, t_tau)]
    if t_tau ** (1.0 / 3.0) < L:
        E.flags.setdefault("exhaustive_taus", []).append(tau_index)
        _exhaust(E, ctx, tau_index, np.arange(t), everything, thr)
        return E
    step = _PrepDenseStep(E, ctx, tau_index, cfg, L, thr, t_tau)
    rel_of = np.zeros(t, dtype=np.int64)
    _sparse_recursion(E, ctx, tau_index, cfg, np.arange(t, dtype=np.int64), [everything], rel_of,
                      L, thr, 1.0 / 3.0 + cfg.eps, tag=1, dense_step=step)
    E.flags.setdefault("dense_runs", {})[tau_index] = step.runs
    return E


def _step_a(ctx: WindowContext, tau_index: int, L: int, thr: int, eps: float,
            rng: np.random.Generator) -> np.ndarray:
    """Mark each A-window bad when at least L/2 of its B samples are close."""
    t, t_tau = len(ctx.awin), ctx.families[tau_index].size
    m = math.ceil(t_tau ** (0.5 - eps) * L)
    bad = np.zeros(t, dtype=bool)
    per = max(1, _CHUNK // m)
    for lo in range(0, t, per):
        ids = np.arange(lo, min(t, lo + per), dtype=np.int64)
        b = rng.integers(0, t_tau, size=(ids.size, m))
        dist = ctx.ed_ab(np.repeat(ids, m), tau_index, b.ravel()).reshape(ids.size, m)
        bad[ids] = (dist <= thr).sum(axis=1) >= L / 2
    return bad


def _sparsify(E: EstimateMap, ctx: WindowContext, tau_index: int, cfg: LearnConfig,
              bad_ids: np.ndarray, L: int, thr: int, rng: np.random.Generator) -> int:
    """Steps B-1, B-2, ...: cover the bad A-windows through dense B-windows.

    B-windows are scanned in index order. Samples for a run of upcoming
    B-windows are evaluated together, but only those up to and including the
    first dense one are consumed (and charged); the rest are redrawn against
    the shrunken bad set.
    """
    fam = ctx.families[tau_index]
    t_tau = fam.size
    tau, d = fam.level.tau, ctx.d
    cost = threshold(tau, d, 3.0)
    r2 = threshold(tau, d, 2.0)
    everything = [(0, t_tau)]
    bad = list(np.sort(bad_ids).tolist())
    dense_b = np.zeros(t_tau, dtype=bool)
    sqrt_t = t_tau ** 0.5
    iterations = 0
    for g in range(1, cfg.levels() + 1):
        if not bad:
            break
        if len(bad) <= sqrt_t:
            _exhaust(E, ctx, tau_index, bad, everything, thr)
            return iterations
        iterations = g
        deg = t_tau ** (0.5 - (g - 1) * cfg.eps)
        b = 0
        width = 1
        while b < t_tau:
            if len(bad) <= sqrt_t:
                break
            bad_arr = np.asarray(bad, dtype=np.int64)
            m = math.ceil(len(bad) * L / deg)
            full = m >= len(bad)
            m_eff = len(bad) if full else m
            scale = m / len(bad) if full else 1.0
            width = max(1, min(width, t_tau - b, _CHUNK // m_eff))
            cand = np.arange(b, b + width, dtype=np.int64)
            cand = cand[~dense_b[cand]]
            if cand.size == 0:
                b += width
                width *= 2
                continue
            if full:
                a_s = np.tile(bad_arr, cand.size)
            else:
                a_s = bad_arr[rng.integers(0, len(bad), size=cand.size * m_eff)]
            dist = ctx.ed_ab(a_s, tau_index, np.repeat(cand, m_eff), charge=False)
            score = (dist.reshape(cand.size, m_eff) <= thr).sum(axis=1) * scale
            dense_pos = np.flatnonzero(score >= L / 2)
            used = cand.size if dense_pos.size == 0 else int(dense_pos[0]) + 1
            ctx.budget.charge_windows(used * m_eff, tau_index)
            if dense_pos.size == 0:
                b = int(cand[-1]) + 1
                width *= 2
                continue
            width = 1
            bd = int(cand[dense_pos[0]])
            dense_b[bd] = True
            da = ctx.ed_ab(bad_arr, tau_index, np.full(bad_arr.size, bd))
            a_mem = bad_arr[da <= thr]
            allb = np.arange(t_tau, dtype=np.int64)
            b_mem = allb[ctx.ed_bb(tau_index, bd, allb, prep=False) <= r2]
            E.add_anchor(Anchor(tau_index, cost, -1, bd, a_mem, b_mem))
            gone = set(a_mem.tolist())
            bad = [a for a in bad if a not in gone]
            b = bd + 1
        if len(bad) <= sqrt_t:
            _exhaust(E, ctx, tau_index, bad, everything, thr)
            return iterations
    if bad:
        E.flags["sparsify_fallback"] = True
        _exhaust(E, ctx, tau_index, bad, everything, thr)
    return iterations


def learn_estimates_noprep(ctx: WindowContext, tau_index: int, cfg: LearnConfig,
                           E: EstimateMap | None = None) -> EstimateMap:
    E = E if E is not None else EstimateMap(ctx)
    fam = ctx.families[tau_index]
    t, t_tau = len(ctx.awin), fam.size
    L = cfg.sample_count(max(ctx.n_a, ctx.n_b))
    thr = threshold(fam.level.tau, ctx.d)
    everything = [(0, t_tau)]
    if t_tau ** (0.5 + cfg.eps) <= L:
        E.flags.setdefault("exhaustive_taus", []).append(tau_index)
        _exhaust(E, ctx, tau_index, np.arange(t), everything, thr)
        return E
    bad = _step_a(ctx, tau_index, L, thr, cfg.eps, derive_rng(cfg.seed, 2, tau_index))
    bad_ids = np.flatnonzero(bad)
    its = _sparsify(E, ctx, tau_index, cfg, bad_ids, L, thr, derive_rng(cfg.seed, 3, tau_index))
    E.flags.setdefault("sparsify_iterations", {})[tau_index] = its
    E.flags.setdefault("bad_windows", {})[tau_index] = int(bad_ids.size)
    sparse_ids = np.flatnonzero(~bad).astype(np.int64)
    rel_of = np.zeros(t, dtype=np.int64)
    _sparse_recursion(E, ctx, tau_index, cfg, sparse_ids, [everything], rel_of, L, thr,
                      0.5 + 2 * cfg.eps, tag=4)
    return E


def preprocess_close_graphs(tokens, d: int, eps: float, tau0_cap: int = 1 << 16, role: str = "both",
                            budget=None) -> dict:
    """Materialize the close-window graphs one string needs in either role.

    As an A-string: G_{A, 2 tau} over its width-d windows for every tau. As a
    B-string: G_{B^tau, 4 tau} over each family. Returns
    {(side, radius, tau_index): {vertex: sorted neighbors}}; all work is
    charged to the preprocessing counters of ``budget``.
    """
    from .driver import build_families  # local import: driver imports this module
    from .windows import decompose_a, tau_levels

    tokens = np.asarray(tokens)
    n = int(tokens.shape[0])
    awin = decompose_a(n, d)
    fams = build_families(n, d, eps, tau0_cap)
    ctx = WindowContext(tokens, tokens, awin, fams, d, budget)
    out = {}
    for lv in tau_levels(d, eps):
        if role in ("A", "both"):
            g = ctx.graph("A", threshold(lv.tau, d, 2.0), lv.index)
            g.materialize()
            out[("A", g.radius, lv.index)] = dict(g.materialized)
        if role in ("B", "both"):
            g = ctx.graph("B", threshold(lv.tau, d, 4.0), lv.index)
            g.materialize()
            out[("B", g.radius, lv.index)] = dict(g.materialized)
    return out
