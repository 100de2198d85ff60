"""Instance generators, counter-based scaling runs and a backend benchmark.

Complexity claims are checked through QueryBudget counters and log-log
slopes, never through wall-clock exponents.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from .budget import QueryBudget
from .errors import ParamError
from .hash_sketch import HashParams, build_sketch
from .oracle import ed_exact, lcs_exact
from .perm_lcs import preprocess_permutation, ulam_query
from .small_ed import ed_bounded_stats

FAMILIES = ("block-moves", "planted-edits", "gap-pair", "random-pair")
VERIFY_LIMIT = 8192
GAP_NO_SIGMA = (1 << 32) - 1  # one below the sentinel


@dataclass(frozen=True)
class InstanceSpec:
    """``k`` is the move count (block-moves), edit count (planted-edits) or
    gap parameter (gap-pair, random-pair). ``side`` picks the gap-pair side."""

    family: str
    n: int
    k: int = 0
    sigma: int = 4
    seed: int = 0
    side: str = "yes"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParamError(f"unknown family {self.family!r}")
        if self.n < 1 or self.k < 0 or self.sigma < 1:
            raise ParamError("n must be positive, k and sigma non-negative")
        if self.side not in ("yes", "no"):
            raise ParamError("side must be 'yes' or 'no'")


@dataclass
class Instance:
    a: np.ndarray
    b: np.ndarray
    spec: InstanceSpec
    bound: dict = field(default_factory=dict)

    def record(self) -> dict:
        return {"spec": asdict(self.spec), "bound": self.bound}


def _rng(spec: InstanceSpec) -> np.random.Generator:
    return np.random.default_rng([spec.seed, spec.n, spec.k, FAMILIES.index(spec.family),
                                  spec.sigma & 0xFFFFFFFF, spec.side == "no"])


def _block_moves(n: int, m: int, rng) -> tuple[np.ndarray, np.ndarray]:
    x = rng.permutation(n).astype(np.int64) + 1
    y = list(x)
    for _ in range(m):
        ln = int(rng.integers(1, 3)) if n > 1 else 1
        s = int(rng.integers(0, n - ln + 1))
        blk = y[s:s + ln]
        del y[s:s + ln]
        t = int(rng.integers(0, len(y) + 1))
        y[t:t] = blk
    return x, np.asarray(y, dtype=np.int64)


def plant_edits(a: np.ndarray, e: int, sigma: int, rng, keep_length: bool = False) -> np.ndarray:
    """Apply e random edits to a. With keep_length, inserts and deletes come in pairs."""
    b = list(np.asarray(a).tolist())
    done = 0
    while done < e:
        op = int(rng.integers(0, 3))
        if keep_length and op != 0:
            if e - done < 2 or len(b) < 2:
                op = 0
            else:
                p = int(rng.integers(0, len(b)))
                del b[p]
                b.insert(int(rng.integers(0, len(b) + 1)), int(rng.integers(0, sigma)))
                done += 2
                continue
        p = int(rng.integers(0, max(1, len(b))))
        if op == 0 and b:
            b[p] = int(rng.integers(0, sigma))
        elif op == 1 or not b:
            b.insert(p, int(rng.integers(0, sigma)))
        else:
            del b[p]
        done += 1
    return np.asarray(b, dtype=np.int64)


def generate(spec: InstanceSpec) -> Instance:
    """Deterministic instance for a spec, with the bound it guarantees."""
    rng = _rng(spec)
    n, k = spec.n, spec.k
    if spec.family == "block-moves":
        a, b = _block_moves(n, k, rng)
        return Instance(a, b, spec, {"lcs_at_least": max(0, n - 2 * k)})
    if spec.family == "planted-edits":
        a = rng.integers(0, spec.sigma, n)
        b = plant_edits(a, k, spec.sigma, rng)
        return Instance(a, b, spec, {"ed_at_most": k})
    if spec.family == "gap-pair":
        if spec.side == "yes":
            a = rng.integers(0, spec.sigma, n)
            b = plant_edits(a, k, spec.sigma, rng, keep_length=True)
            return Instance(a, b, spec, {"ed_at_most": k})
        a = rng.integers(0, GAP_NO_SIGMA, n)
        b = rng.integers(0, GAP_NO_SIGMA, n)
        return Instance(a, b, spec, {"ed_above": 3 * k * k})
    a = rng.integers(0, spec.sigma, n)
    b = rng.integers(0, spec.sigma, n)
    return Instance(a, b, spec, {"ed_above": 3 * k * k})


def verify(inst: Instance, limit: int = VERIFY_LIMIT) -> dict | None:
    """Re-check the ground-truth bound with the oracle; None when too large."""
    if max(len(inst.a), len(inst.b)) > limit:
        return None
    out = dict(inst.bound)
    if "lcs_at_least" in inst.bound:
        v = lcs_exact(inst.a, inst.b)
        out.update(lcs=v, ok=v >= inst.bound["lcs_at_least"])
    else:
        v = ed_exact(inst.a, inst.b)
        ok = v <= inst.bound["ed_at_most"] if "ed_at_most" in inst.bound else v > inst.bound["ed_above"]
        out.update(ed=v, ok=ok)
    return out


def fit_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    if x.size < 2 or np.ptp(x) == 0:
        raise ParamError("need at least two distinct x values")
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ScalingReport:
    family: str
    rows: list[dict]
    slope: float
    x: str
    y: str


def _small_ed_rows(ladder, n: int, reps: int, seed: int, sigma: int) -> list[dict]:
    rows = []
    params = HashParams(seed)
    for k in ladder:
        for r in range(reps):
            inst = generate(InstanceSpec("planted-edits", n, k, sigma, seed + r))
            sa, sb = build_sketch(inst.a, params), build_sketch(inst.b, params)
            t0 = time.perf_counter()
            res = ed_bounded_stats(sa, sb, k)
            rows.append({"n": n, "k": k, "rep": r, "budget": res.equal_calls,
                         "time": time.perf_counter() - t0, "ratio": None})
    return rows


def _perm_rows(ladder, n: int, reps: int, seed: int) -> list[dict]:
    rows = []
    params = HashParams(seed)
    for m in ladder:
        for r in range(reps):
            inst = generate(InstanceSpec("block-moves", n, m, seed=seed + r))
            sx = preprocess_permutation(inst.a, params)
            sy = preprocess_permutation(inst.b, params)
            t0 = time.perf_counter()
            res = ulam_query(sx, sy)
            rows.append({"n": n, "k": n - res.lcs, "moves": m, "rep": r, "budget": res.compares,
                         "blocks": len(res.blocks), "time": time.perf_counter() - t0,
                         "ratio": None})
    return rows


def _learner_rows(prep: bool, ladder, reps: int, seed: int, d: int, eps: float, samples: int,
                  tau: float, sigma: int, ed_frac: float) -> list[dict]:
    from .driver import ApproxConfig, build_context
    from .estimate_learning import LearnConfig, learn_estimates_noprep, learn_estimates_prep
    from .estimates import EstimateMap

    learn = learn_estimates_prep if prep else learn_estimates_noprep
    rows = []
    for n in ladder:
        for r in range(reps):
            inst = generate(InstanceSpec("planted-edits", n, max(1, int(n * ed_frac)), sigma, seed + r))
            cfg = ApproxConfig(eps=eps, d=d, seed=seed + r)
            ctx = build_context(inst.a, inst.b, cfg, prep=prep, budget=QueryBudget())
            ti = min(ctx.families, key=lambda i: abs(ctx.families[i].level.tau - tau))
            fam = ctx.families[ti]
            t0 = time.perf_counter()
            E = learn(ctx, ti, LearnConfig(eps=eps, seed=seed + r, samples=samples),
                      EstimateMap(ctx))
            rows.append({"n": n, "t": len(ctx.awin), "t_tau": fam.size, "tau": fam.level.tau,
                         "rep": r, "budget": int(ctx.budget.per_tau.get(ti, 0)),
                         "prep_budget": int(ctx.budget.prep_per_tau.get(ti, 0)),
                         "exhaustive": ti in E.flags.get("exhaustive_taus", []),
                         "time": time.perf_counter() - t0, "ratio": None})
    return rows


def run_scaling(family: str, ladder, repetitions: int = 1, seed: int = 0, n: int = 4096,
                sigma: int | None = None, d: int = 8, eps: float = 0.05, samples: int = 2, tau: float = 0.25,
                ed_frac: float = 0.05) -> ScalingReport:
    """Counter table over a parameter ladder plus its log-log slope.

    ``small-ed``: equal calls against k at fixed n. ``perm-lcs``: hash
    comparisons against k = n - LCS at fixed n (ladder lists move counts).
    ``prep`` / ``noprep``: per-tau window-distance queries against t_tau over
    an n ladder, with d, eps, the sample count and tau held fixed so the
    regression isolates the t_tau exponent. Planted edits default to a
    large alphabet so they rarely cancel and only aligned windows are close.
    """
    if sigma is None:
        sigma = 1 << 20
    if family == "small-ed":
        rows = _small_ed_rows(ladder, n, repetitions, seed, sigma)
        xk = "k"
    elif family == "perm-lcs":
        rows = _perm_rows(ladder, n, repetitions, seed)
        xk = "k"
    elif family in ("prep", "noprep"):
        rows = _learner_rows(family == "prep", ladder, repetitions, seed, d, eps, samples, tau,
                             sigma, ed_frac)
        xk = "t_tau"
    else:
        raise ParamError(f"unknown scaling family {family!r}")
    good = [r for r in rows if r[xk] > 0 and r["budget"] > 0]
    slope = fit_slope([r[xk] for r in good], [r["budget"] for r in good])
    return ScalingReport(family, rows, slope, xk, "budget")


def _time(fn, *args, repeat: int = 3) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def compare_backends(n: int = 2048, seed: int = 0, repeat: int = 3) -> list[dict]:
    """Time the compiled kernels against the pure-Python fallback on one input each."""
    fast = K.compiled_table()
    slow = K.python_table()
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, n).astype(np.uint32)
    b = plant_edits(a, max(1, n // 64), 4, rng).astype(np.uint32)
    base = HashParams(seed).base
    pa = slow["prefix_hashes"](a, base)
    pb = slow["prefix_hashes"](b, base)
    pw = slow["powers"](base, max(n, len(b)) + 1)
    k = max(4, n // 32)
    d = 16
    m = min(n, len(b)) // d
    a0 = np.arange(m, dtype=np.int64) * d
    ln = np.full(m, d, dtype=np.int64)
    small = min(n, 512)
    cases = {
        "prefix_hashes": lambda t: t["prefix_hashes"](a, base),
        "wave_ed": lambda t: t["wave_ed"](pa, pb, pw, n, len(b), k, False),
        "window_ed_pairs": lambda t: t["window_ed_pairs"](a, b, 4, a0, ln, a0, ln),
        "ed_dp": lambda t: t["ed_dp"](a[:small], b[:small]),
        "ed_bitparallel": lambda t: _bitparallel(t, a, b),
    }
    out = []
    for name, call in cases.items():
        py = _time(call, slow, repeat=1)
        rec = {"kernel": name, "n": n, "python_s": py, "compiled_s": None, "speedup": None}
        if fast is not None:
            assert np.array_equal(np.asarray(call(fast), dtype=object),
                                  np.asarray(call(slow), dtype=object)), name
            c = _time(call, fast, repeat=repeat)
            rec.update(compiled_s=c, speedup=py / c if c > 0 else math.inf)
        out.append(rec)
    return out


def _bitparallel(t, a, b):
    from .tokens import dense_codes, occurrences

    (x, y), sigma = dense_codes(a, b)
    ptr, pos = occurrences(y, sigma)
    return t["ed_bitparallel"](y, x, ptr, pos)
