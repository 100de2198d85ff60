"""Aggregating learned window costs into a global distance.

For a threshold Delta the cost of the cheapest monotone window mapping is
computed by a DP over (A-window end, B position) restricted to the band
|i - j| <= 10*Delta (shifted by n_B - n_A), with every B family thinned to a
start grid of roughly Delta*d/n. Delta is then searched on a (1+eps) ladder.

Mapping cost: the learned cost of every matched pair, |a| for an unmatched
A-window, plus one per B position that is covered by no window or one per
extra covering window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import AboveThreshold, ParamError
from .estimates import EstimateMap

INF_KERNEL = 1 << 50


@dataclass
class MappingCost:
    """Result of one DP run.

    ``mapping`` has one entry per A-window: None for a deleted window,
    otherwise (tau_index or -1, start, length, cost) of the matched B-window.
    """

    value: int
    delta: float
    evals: int
    mapping: list | None = None
    band: tuple[int, int] = (0, 0)
    tried: list = field(default_factory=list)


def family_strides(E: EstimateMap, delta: float, subsample: bool = True) -> dict[int, int]:
    """Start-grid step per family after thinning to gamma = Delta*d/n."""
    ctx = E.ctx
    n = max(ctx.n_a, ctx.n_b)
    gamma = delta * ctx.d / n
    out = {}
    for ti, fam in ctx.families.items():
        g_tau = max(1, int(fam.windows.gamma))
        factor = max(1, math.floor(gamma / g_tau + 1e-9)) if subsample else 1
        out[ti] = g_tau * factor
    return out


def band_offsets(n_a: int, n_b: int, delta: float) -> tuple[int, int]:
    w = int(math.floor(10 * delta + 1e-9))
    return min(0, n_b - n_a) - w, max(0, n_b - n_a) + w


def subsampled_windows(E: EstimateMap, delta: float, subsample: bool = True):
    """{tau_index: (starts, lens)} of the B-windows the DP may use at this Delta."""
    strides = family_strides(E, delta, subsample)
    out = {}
    for ti, fam in E.ctx.families.items():
        w = fam.windows
        keep = (w.starts - 1) % strides[ti] == 0
        out[ti] = (w.starts[keep], w.lens[keep])
    return out


GALLOP_MAX_STEP = 8


class _Compiled:
    """Flat arrays describing an EstimateMap, independent of Delta."""

    def __init__(self, E: EstimateMap):
        ctx = E.ctx
        t = len(ctx.awin)
        self.t = t
        # direct entries
        rows = []
        for ti, table in E.direct.items():
            if not table:
                continue
            w = ctx.families[ti].windows
            keys = np.array(list(table.keys()), dtype=np.int64).reshape(-1, 2)
            costs = np.fromiter(table.values(), dtype=np.int64, count=len(table))
            rows.append((keys[:, 0], w.starts[keys[:, 1]], w.lens[keys[:, 1]], costs,
                         np.full(len(table), ti, dtype=np.int64)))
        if rows:
            a, s, ln, c, ti = (np.concatenate(x) for x in zip(*rows))
        else:
            a = s = ln = c = ti = np.empty(0, dtype=np.int64)
        order = np.lexsort((ln, s, a))
        self.d_a, self.d_s, self.d_len = a[order], s[order], ln[order]
        self.d_cost, self.d_tau = c[order], ti[order]
        # anchors: members sorted by end
        m_s, m_len, m_end, mptr, costs, taus = [], [], [], [0], [], []
        an_a, an_g = [], []
        for g, anc in enumerate(E.anchors):
            w = ctx.families[anc.tau_index].windows
            bs, bl = w.starts[anc.b_members], w.lens[anc.b_members]
            be = bs + bl - 1
            o = np.lexsort((bs, be))
            m_s.append(bs[o])
            m_len.append(bl[o])
            m_end.append(be[o])
            mptr.append(mptr[-1] + len(o))
            costs.append(anc.cost)
            taus.append(anc.tau_index)
            an_a.append(np.asarray(anc.a_members, dtype=np.int64))
            an_g.append(np.full(len(anc.a_members), g, dtype=np.int64))
        cat = lambda xs: np.concatenate(xs).astype(np.int64) if xs else np.empty(0, dtype=np.int64)
        self.m_s, self.m_len, self.m_end = cat(m_s), cat(m_len), cat(m_end)
        self.an_mptr = np.asarray(mptr, dtype=np.int64)
        self.an_cost = np.asarray(costs, dtype=np.int64)
        self.an_tau = np.asarray(taus, dtype=np.int64)
        pa, pg = cat(an_a), cat(an_g)
        o = np.lexsort((pg, pa))
        self.an_ptr = self._ptr(pa[o], t)
        self.an_ids = pg[o]
        # lazy blocks, as start spans per A-window with (len, tau, thr) triples
        per_a: dict[int, dict[tuple[int, int], dict[tuple[int, int], int]]] = {}
        for blk in E.blocks:
            fam = ctx.families[blk.tau_index]
            w = fam.windows
            spans = [(int(w.starts[lo]), int(w.starts[hi - 1])) for lo, hi in blk.ranges if hi > lo]
            # nominal widths; the kernel truncates them at the end of B
            lens = sorted({fam.level.h, fam.level.l})
            for a in blk.a_ids.tolist():
                slot = per_a.setdefault(a, {})
                for span in spans:
                    trip = slot.setdefault(span, {})
                    for ln in lens:
                        key = (ln, blk.tau_index)
                        trip[key] = max(trip.get(key, -1), blk.thr)
        self.block_spec = per_a
        self._by_strides: dict[tuple, tuple] = {}

    @staticmethod
    def _ptr(keys: np.ndarray, t: int) -> np.ndarray:
        return np.searchsorted(keys, np.arange(t + 1), side="left").astype(np.int64)

    def arrays(self, strides: dict[int, int]):
        key = tuple(sorted(strides.items()))
        hit = self._by_strides.get(key)
        if hit is None:
            hit = self._by_strides[key] = self._arrays(strides)
        return hit

    def _arrays(self, strides: dict[int, int]):
        t = self.t
        # direct entries on the thinned grid
        if self.d_a.size:
            st = np.array([strides[int(x)] for x in self.d_tau], dtype=np.int64) \
                if len(strides) > 1 else np.full(self.d_a.size, next(iter(strides.values())))
            keep = (self.d_s - 1) % st == 0
        else:
            keep = np.zeros(0, dtype=bool)
        d_a = self.d_a[keep]
        direct = (self._ptr(d_a, t), self.d_s[keep], self.d_len[keep], self.d_cost[keep])
        an_mod = np.array([strides[int(x)] for x in self.an_tau], dtype=np.int64)
        anchors = (self.an_ptr, self.an_ids, self.an_cost, self.an_mptr, an_mod,
                   self.m_s, self.m_len, self.m_end)
        # blocks: identical (span, triples) definitions are shared between A-windows
        defs: dict[tuple, int] = {}
        slo, shi, tptr, t_len, t_stride, t_thr = [], [], [0], [], [], []
        ptr, ids = [0], []
        for a in range(t):
            mine = []
            for span, trip in self.block_spec.get(a, {}).items():
                merged: dict[tuple[int, int], int] = {}
                for (ln, ti), thr in trip.items():
                    key = (ln, strides[ti])
                    merged[key] = max(merged.get(key, -1), thr)
                key = (span, tuple(sorted(merged.items())))
                bid = defs.get(key)
                if bid is None:
                    bid = len(defs)
                    defs[key] = bid
                    slo.append(span[0])
                    shi.append(span[1])
                    for (ln, stv), thr in key[1]:
                        t_len.append(ln)
                        t_stride.append(stv)
                        t_thr.append(thr)
                    tptr.append(len(t_len))
                mine.append(bid)
            ids.extend(sorted(set(mine)))
            ptr.append(len(ids))
        as64 = lambda xs: np.asarray(xs, dtype=np.int64)
        blocks = (as64(ptr), as64(ids), as64(slo), as64(shi), as64(tptr),
                  as64(t_len), as64(t_stride), as64(t_thr))
        return direct, anchors, blocks


def _compiled(E: EstimateMap) -> _Compiled:
    key = (id(E), len(E.anchors), len(E.blocks), sum(len(v) for v in E.direct.values()))
    cached = getattr(E, "_dp_compiled", None)
    if cached is not None and cached[0] == key:
        return cached[1]
    comp = _Compiled(E)
    E._dp_compiled = (key, comp)
    return comp


def run_dp(E: EstimateMap, delta: float, subsample: bool = True, trace: bool = False,
           cutoff: float | None = None):
    """Raw banded DP at one Delta: (cost, evals, mapping or None, band).

    With a cutoff, any result above it comes back as INF_KERNEL.
    """
    ctx = E.ctx
    comp = _compiled(E)
    strides = family_strides(E, delta, subsample)
    direct, anchors, blocks = comp.arrays(strides)
    lo_off, hi_off = band_offsets(ctx.n_a, ctx.n_b, delta)
    awin = ctx.awin
    a0 = np.ascontiguousarray(awin.starts - 1, dtype=np.int64)
    al = np.ascontiguousarray(awin.lens, dtype=np.int64)
    cut = INF_KERNEL if cutoff is None else int(math.floor(cutoff + 1e-9))
    cost, evals, tr = K.wdp_run(ctx.A, ctx.B, ctx.sigma, a0, al, lo_off, hi_off, cut,
                                *direct, *anchors, *blocks, trace)
    mapping = _backtrack(tr, ctx.n_b, al, lo_off) if trace and cost < INF_KERNEL else None
    return int(cost), int(evals), mapping, (lo_off, hi_off)


def _backtrack(tr, n_b: int, a_lens: np.ndarray, lo_off: int) -> list:
    seg_off, seg_lo, kind, tlen, tcost, tfrom = tr
    t = len(a_lens)
    out: list = [None] * t
    j = n_b
    q = t - 1
    while q >= 0:
        r = int(seg_off[q]) + j - int(seg_lo[q])
        k = int(kind[r])
        if k == 1:
            j -= 1
        elif k == 0:
            q -= 1
        elif k == 2:
            ln = int(tlen[r])
            out[q] = (-1, j - ln + 1, ln, int(tcost[r]))
            j = int(tfrom[r])
            q -= 1
        else:
            raise RuntimeError("trace walked into an unreachable state")
    return out


def mapping_cost(mapping: list, a_lens, n_b: int) -> int:
    """Cost of a window mapping evaluated straight from its definition."""
    cover = np.zeros(n_b + 2, dtype=np.int64)
    total = 0
    for q, m in enumerate(mapping):
        if m is None:
            total += int(a_lens[q])
        else:
            _, s, ln, c = m
            total += c
            cover[s] += 1
            cover[s + ln] -= 1
    counts = np.cumsum(cover)[1:n_b + 1]
    return total + int(np.abs(counts - 1).sum())


def drop_nested(mapping: list) -> list:
    """Unmatch windows whose successor starts earlier (keeps the mapping monotone).

    For sound costs this never increases the mapping cost.
    """
    out = list(mapping)
    changed = True
    while changed:
        changed = False
        last = None
        for q, m in enumerate(out):
            if m is None:
                continue
            if last is not None and m[1] < out[last][1]:
                out[last] = None
                changed = True
                break
            last = q
    return out


def dp_threshold(E: EstimateMap, delta: float, eps: float = 0.1, trace: bool = True,
                 subsample: bool = True):
    """Cheapest mapping inside the 10*Delta band, or AboveThreshold past 10*Delta*(1+eps)."""
    if delta < 1:
        raise ParamError("delta must be at least 1")
    cutoff = 10 * delta * (1 + eps)
    cost, evals, mapping, band = run_dp(E, delta, subsample, trace, cutoff)
    if cost > cutoff:
        return AboveThreshold(delta, cutoff)
    if mapping is not None:
        mapping = drop_nested(mapping)
    return MappingCost(cost, delta, evals, mapping, band)


def delta_ladder(n: int, eps: float) -> list[float]:
    out, x = [], 1.0
    while x < 2 * n:
        out.append(x)
        x *= 1 + eps
    out.append(float(2 * n))
    return out


def ed_of_estimate(E: EstimateMap, eps: float = 0.1, trace: bool = True,
                   subsample: bool = True) -> MappingCost:
    """Smallest ladder Delta at which the DP succeeds, and its cost.

    The ladder is searched by galloping then bisection. A success with cost
    c also rules out every rung whose cutoff is below c, since narrowing the
    band cannot make the optimum cheaper.
    """
    ctx = E.ctx
    ladder = delta_ladder(max(ctx.n_a, ctx.n_b), eps)
    tried = []
    state = {"lo": -1, "best": None}

    def attempt(idx):
        # a success right above a known failure is the answer: trace it now
        tr = trace and idx == state["lo"] + 1
        res = dp_threshold(E, ladder[idx], eps, trace=tr, subsample=subsample)
        ok = not isinstance(res, AboveThreshold)
        tried.append((ladder[idx], res.value if ok else None))
        if ok:
            if tr:
                state["best"] = res
            k = state["lo"]
            while k + 1 < idx and 10 * ladder[k + 1] * (1 + eps) < res.value:
                k += 1
            state["lo"] = k
        else:
            state["lo"] = max(state["lo"], idx)
        return ok

    # the band must reach the end cell before anything can succeed
    first = 0
    gap = abs(ctx.n_b - ctx.n_a)
    while first < len(ladder) - 1 and 10 * ladder[first] * (1 + eps) < gap:
        first += 1
    state["lo"] = first - 1
    hi, step, idx = None, 1, first
    while True:
        if attempt(idx):
            hi = idx
            break
        if idx == len(ladder) - 1:
            break
        idx = min(len(ladder) - 1, idx + step)
        # wide bands are the expensive runs, so never overshoot by much
        step = min(2 * step, GALLOP_MAX_STEP)
    if hi is None:
        raise RuntimeError("DP failed even at the widest band")
    while hi - state["lo"] > 1:
        mid = (state["lo"] + hi) // 2
        if attempt(mid):
            hi = mid
    final = state["best"]
    if final is None or final.delta != ladder[hi] or not trace:
        final = dp_threshold(E, ladder[hi], eps, trace=trace, subsample=subsample)
    final.tried = tried
    return final


def restricted_cost(E: EstimateMap, delta: float, subsample: bool = True):
    """(cost(a, start, length), candidate windows) exactly as the DP sees them at Delta.

    A window present in several families takes the minimum over the families
    that keep it after thinning.
    """
    kept = subsampled_windows(E, delta, subsample)
    where: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for ti, (starts, lens) in kept.items():
        w = E.ctx.families[ti].windows
        for s, ln in zip(starts.tolist(), lens.tolist()):
            lo = int(np.searchsorted(w.starts, s, side="left"))
            idx = lo + int(np.flatnonzero(w.lens[lo:lo + 4] == ln)[0])
            where.setdefault((s, ln), []).append((ti, idx))

    def cost(a: int, start: int, length: int) -> float:
        return min((E.lookup_family(a, ti, b) for ti, b in where.get((start, length), ())),
                   default=math.inf)

    return cost, sorted(where)
