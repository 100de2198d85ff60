"""End-to-end approximate edit distance.

``approx_ed_prep`` is the estimator that may use per-string preprocessing
(close-window graphs); ``approx_ed_noprep`` needs none and first tries the
exact wave algorithm for small distances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .budget import QueryBudget
from .errors import EmptyInput, ExceedsThreshold, ParamError, ParamMismatch
from .estimate_learning import (LearnConfig, learn_estimates_noprep, learn_estimates_prep,
                                preprocess_close_graphs)
from .estimates import EstimateMap, Family, WindowContext
from .hash_sketch import HashParams, StringSketch, build_sketch, check_compatible
from .small_ed import ed_bounded_doubling
from .tokens import TokenString, as_tokens
from .window_dp import ed_of_estimate, mapping_cost
from .windows import decompose_a, decompose_b, tau_levels


@dataclass
class ApproxConfig:
    eps: float = 0.1
    d: int | None = None  # overrides d_exponent
    d_exponent: float | None = None  # default 1/4 with preprocessing, 1/5 without
    c_s: float = 1.0
    seed: int = 0
    tau0_cap: int = 1 << 16  # tau = 0 family keeps every start up to this length
    fast_path: bool = True
    k_cap_exponent: float = 0.6
    subsample: bool = True
    dense_cap_factor: float = 2.0

    def __post_init__(self):
        if not 0 < self.eps <= 0.5:
            raise ParamError(f"eps must lie in (0, 1/2], got {self.eps}")
        if self.c_s <= 0:
            raise ParamError("c_s must be positive")
        if self.d is not None and self.d < 1:
            raise ParamError("d must be positive")

    def window_width(self, n: int, prep: bool) -> int:
        if self.d is not None:
            return max(1, min(self.d, n))
        exp = self.d_exponent if self.d_exponent is not None else (0.25 if prep else 0.2)
        return max(1, min(n, math.ceil(n ** exp - 1e-9)))

    def learn_config(self) -> LearnConfig:
        return LearnConfig(eps=self.eps, c_s=self.c_s, seed=self.seed,
                           dense_cap_factor=self.dense_cap_factor)


@dataclass
class ApproxResult:
    estimate: int
    mode: str  # "prep", "noprep" or "exact"
    d: int
    delta: float | None
    mapping: list | None
    mapping_cost: int | None
    budget: dict
    per_tau: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def as_record(self) -> dict:
        return {"estimate": self.estimate, "mode": self.mode, "d": self.d, "delta": self.delta,
                "mapping_cost": self.mapping_cost, "budget": self.budget,
                "elapsed": round(self.elapsed, 4)}


@dataclass
class ApproxPrep:
    """Preprocessing output for one string: its sketch and close-window graphs.

    ``graphs`` maps (side, radius, tau_index) to materialized adjacency; it is
    only valid for the (d, eps, tau0_cap) it was built with.
    """

    sketch: StringSketch
    role: str  # "A", "B" or "both"
    d: int
    eps: float
    tau0_cap: int
    graphs: dict = field(default_factory=dict)
    budget: QueryBudget = field(default_factory=QueryBudget)


def _tokens(x) -> tuple[TokenString, StringSketch | None]:
    if isinstance(x, ApproxPrep):
        x = x.sketch
    if isinstance(x, StringSketch):
        if x.raw is None:
            raise ParamError("the approximate estimators need sketches with embedded tokens")
        return x.raw, x
    return as_tokens(x), None


def build_families(n_b: int, d: int, eps: float, tau0_cap: int) -> dict[int, Family]:
    fams = {}
    for lv in tau_levels(d, eps):
        step = None
        if lv.j == -1 and n_b > tau0_cap:
            step = max(1, math.ceil(eps * d))
        fams[lv.index] = Family(lv, decompose_b(n_b, d, lv, eps, step))
    return fams


def build_context(a, b, cfg: ApproxConfig, prep: bool, budget: QueryBudget | None = None):
    ta, _ = _tokens(a)
    tb, _ = _tokens(b)
    if len(ta) == 0 or len(tb) == 0:
        raise EmptyInput("both strings must be non-empty")
    d = cfg.window_width(max(len(ta), len(tb)), prep)
    d = min(d, len(ta))
    awin = decompose_a(len(ta), d)
    fams = build_families(len(tb), d, cfg.eps, cfg.tau0_cap)
    return WindowContext(ta.tokens, tb.tokens, awin, fams, d, budget)


def preprocess_approx(s, cfg: ApproxConfig | None = None, role: str = "both",
                      materialize: bool = False, n_hint: int | None = None) -> ApproxPrep:
    """Sketch one string and (optionally) materialize its close-window graphs.

    Graphs are tied to the window width d, which depends on the length of
    the longer string; ``n_hint`` supplies it when known (default: own length).
    """
    cfg = cfg or ApproxConfig()
    if role not in ("A", "B", "both"):
        raise ParamError(f"role must be A, B or both, got {role!r}")
    ts = as_tokens(s)
    sk = build_sketch(ts, HashParams(cfg.seed))
    n = max(len(ts), n_hint or 0)
    d = min(cfg.window_width(n, True), len(ts))
    out = ApproxPrep(sk, role, d, cfg.eps, cfg.tau0_cap)
    if materialize:
        out.graphs = preprocess_close_graphs(ts.tokens, d, cfg.eps, cfg.tau0_cap, role, out.budget)
    return out


def _attach_graphs(ctx: WindowContext, prep: ApproxPrep | None, side: str, eps: float,
                   tau0_cap: int) -> bool:
    if prep is None or not prep.graphs or prep.d != ctx.d or prep.eps != eps \
            or prep.tau0_cap != tau0_cap:
        return False
    n_side = ctx.n_a if side == "A" else ctx.n_b
    if prep.sketch.n != n_side:
        return False
    for (gside, radius, ti), adj in prep.graphs.items():
        if gside == side:
            ctx.graph(side, radius, ti if side == "B" else ti).load(adj)
    return True


def _finish(E: EstimateMap, ctx: WindowContext, cfg: ApproxConfig, mode: str, t0: float,
            per_tau: dict) -> ApproxResult:
    res = ed_of_estimate(E, cfg.eps, trace=True, subsample=cfg.subsample)
    mc = mapping_cost(res.mapping, ctx.awin.lens, ctx.n_b) if res.mapping is not None else None
    flags = {k: v for k, v in E.flags.items()}
    flags["dp_tries"] = len(res.tried)
    return ApproxResult(int(res.value), mode, ctx.d, res.delta, res.mapping, mc,
                        ctx.budget.snapshot(), per_tau, flags, time.perf_counter() - t0)


def _check_seeds(a, b) -> None:
    sa = a.sketch if isinstance(a, ApproxPrep) else a
    sb = b.sketch if isinstance(b, ApproxPrep) else b
    if isinstance(sa, StringSketch) and isinstance(sb, StringSketch):
        check_compatible(sa, sb)


def approx_ed_prep(a, b, cfg: ApproxConfig | None = None) -> ApproxResult:
    """Estimate ED(A, B) within about 7x, using close-window graphs.

    ``a`` and ``b`` may be raw strings, sketches with embedded tokens, or
    ApproxPrep objects; graphs from matching ApproxPrep objects are reused,
    anything missing is built on demand and charged to preprocessing.
    """
    cfg = cfg or ApproxConfig()
    _check_seeds(a, b)
    for x in (a, b):
        if isinstance(x, ApproxPrep) and x.sketch.params.seed != cfg.seed:
            raise ParamMismatch("sketch seed differs from the configured seed")
    t0 = time.perf_counter()
    ctx = build_context(a, b, cfg, prep=True)
    reused = {"A": _attach_graphs(ctx, a if isinstance(a, ApproxPrep) else None, "A",
                                  cfg.eps, cfg.tau0_cap),
              "B": _attach_graphs(ctx, b if isinstance(b, ApproxPrep) else None, "B",
                                  cfg.eps, cfg.tau0_cap)}
    lc = cfg.learn_config()
    E = EstimateMap(ctx)
    per_tau = {}
    for ti, fam in ctx.families.items():
        part = learn_estimates_prep(ctx, ti, lc, EstimateMap(ctx))
        E.merge(part)
        per_tau[ti] = {"tau": fam.level.tau, "t_tau": fam.size,
                       "queries": ctx.budget.per_tau.get(ti, 0),
                       "prep_queries": ctx.budget.prep_per_tau.get(ti, 0)}
    out = _finish(E, ctx, cfg, "prep", t0, per_tau)
    out.flags["graphs_reused"] = reused
    return out


def approx_ed_noprep(a, b, cfg: ApproxConfig | None = None) -> ApproxResult:
    """Estimate ED(A, B) within about 3x without any preprocessing."""
    cfg = cfg or ApproxConfig()
    _check_seeds(a, b)
    t0 = time.perf_counter()
    ta, sa = _tokens(a)
    tb, sb = _tokens(b)
    if len(ta) == 0 or len(tb) == 0:
        raise EmptyInput("both strings must be non-empty")
    budget = QueryBudget()
    n = max(len(ta), len(tb))
    if cfg.fast_path:
        params = HashParams(cfg.seed)
        sa = sa if sa is not None else build_sketch(ta, params)
        sb = sb if sb is not None else build_sketch(tb, params)
        k_cap = math.ceil(n ** cfg.k_cap_exponent - 1e-9)
        r = ed_bounded_doubling(sa, sb, k_cap, budget)
        if not isinstance(r, ExceedsThreshold):
            return ApproxResult(int(r), "exact", 0, None, None, None, budget.snapshot(),
                                {}, {"k_cap": k_cap}, time.perf_counter() - t0)
    ctx = build_context(ta, tb, cfg, prep=False, budget=budget)
    lc = cfg.learn_config()
    E = EstimateMap(ctx)
    per_tau = {}
    for ti, fam in ctx.families.items():
        part = learn_estimates_noprep(ctx, ti, lc, EstimateMap(ctx))
        E.merge(part)
        per_tau[ti] = {"tau": fam.level.tau, "t_tau": fam.size,
                       "queries": ctx.budget.per_tau.get(ti, 0)}
    return _finish(E, ctx, cfg, "noprep", t0, per_tau)
