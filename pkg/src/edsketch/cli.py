"""Command-line interface: ``edsk preprocess | query | join | oracle | bench``.

Results go to stdout as one JSON object per line; summaries and errors go to
stderr. Option values resolve as flag, then EDSK_* environment variable,
then default.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .budget import QueryBudget
from .errors import EdskError, ExceedsThreshold, ParamError, ParamMismatch
from .hash_sketch import HashParams, build_sketch, check_compatible
from .sketch_io import MAGIC, load, save
from .tokens import TokenString, read_records

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NEGATIVE = 3  # NO verdict or distance above the threshold

ALGOS = ("perm-lcs", "small-ed", "gap", "approx")


def _env(name: str, cast, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ParamError(f"{name}={raw!r} is not a valid value") from None


def _resolve(args) -> None:
    if args.seed is None:
        args.seed = _env("EDSK_SEED", int, None)
    if args.epsilon is None:
        args.epsilon = _env("EDSK_EPSILON", float, 0.1)
    if getattr(args, "jobs", None) is None:
        args.jobs = _env("EDSK_JOBS", int, 1)
    if args.jobs < 1:
        raise ParamError("--jobs must be at least 1")


def _emit(rec: dict) -> None:
    sys.stdout.write(json.dumps(rec, sort_keys=True) + "\n")


def _note(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _is_sketch(path: Path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == MAGIC
    except OSError:
        return False


def _safe_name(name: str, used: set) -> str:
    base = re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("._") or "record"
    out = base
    for i in itertools.count(1):
        if out not in used:
            break
        out = f"{base}-{i}"
    used.add(out)
    return out


def _build(tok: TokenString, algo: str, args, materialize: bool = False):
    """Preprocess one record for an algorithm."""
    seed = args.seed if args.seed is not None else 0
    params = HashParams(seed)
    embed = not getattr(args, "no_raw", False)
    if algo == "small-ed":
        return build_sketch(tok, params, embed_raw=embed)
    if algo == "perm-lcs":
        from .perm_lcs import preprocess_permutation

        return preprocess_permutation(tok, params, embed_raw=embed)
    if algo == "gap":
        from .gap_single import preprocess_single

        if args.k is None:
            raise ParamError("gap preprocessing needs --k")
        return preprocess_single(tok, args.k, seed, args.c_s)
    from .driver import ApproxConfig, preprocess_approx

    cfg = ApproxConfig(eps=args.epsilon, seed=seed, c_s=args.c_s)
    return preprocess_approx(tok, cfg, materialize=materialize,
                             n_hint=getattr(args, "n_hint", None))


# ---------------------------------------------------------------- preprocess

def cmd_preprocess(args) -> int:
    if args.algo == "gap" and args.k is None:
        args.parser.error("gap preprocessing requires --k")
    if args.k is not None and args.k < 1:
        raise ParamError("--k must be positive")
    if not 0 < args.epsilon <= 0.5:
        raise ParamError("--epsilon must lie in (0, 1/2]")
    records = read_records(args.input, args.format)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    used: set = set()
    for rec in records:
        obj = _build(rec, args.algo, args, materialize=args.graphs)
        name = _safe_name(rec.name or Path(args.input).stem, used)
        path = save(out / f"{name}.edsk", obj, rec.name or name)
        _emit({"path": str(path), "name": rec.name or name, "algo": args.algo, "n": len(rec),
               "seed": args.seed if args.seed is not None else 0})
    _note(f"preprocessed {len(records)} record(s) into {out}")
    return EXIT_OK


# --------------------------------------------------------------------- query

def _load_operand(path: str, fmt: str):
    """(object or TokenString, algo or None, name)."""
    p = Path(path)
    if _is_sketch(p):
        obj, algo, name = load(p)
        return obj, algo, name or p.stem
    recs = read_records(p, fmt)
    return recs[0], None, recs[0].name or p.stem


def _sketch_seed(obj) -> int | None:
    if isinstance(obj, TokenString):
        return None
    base = getattr(obj, "sketch", obj)
    return base.params.seed if hasattr(base, "params") else None


def _raw_of(obj) -> TokenString:
    if isinstance(obj, TokenString):
        return obj
    base = getattr(obj, "sketch", obj)
    raw = getattr(base, "raw", None)
    if raw is None:
        raise ParamError("this query needs the raw tokens, but the sketch was built without them")
    return raw


def _pair_result(algo: str, a, b, args) -> tuple[dict, bool]:
    """Evaluate one pair; returns (fields, negative)."""
    budget = QueryBudget()
    if algo == "small-ed":
        from .small_ed import ed_bounded, ed_bounded_doubling

        check_compatible(a, b)
        if args.k is not None:
            r = ed_bounded(a, b, args.k, budget)
        else:
            r = ed_bounded_doubling(a, b, None, budget)
        neg = isinstance(r, ExceedsThreshold)
        out = {"distance": None if neg else int(r), "exceeds": neg}
        if args.k is not None:
            out["k"] = args.k
    elif algo == "perm-lcs":
        from .perm_lcs import ulam_query

        r = ulam_query(a, b, reconstruct=args.reconstruct, budget=budget)
        out = {"lcs": r.lcs, "distance": a.n - r.lcs, "blocks": len(r.blocks)}
        if r.chain is not None:
            out["chain"] = [list(x) for x in r.chain]
        neg = args.k is not None and out["distance"] > args.k
    elif algo == "gap":
        from .gap_single import SampledSketchB, gap_query

        if isinstance(a, SampledSketchB) and not isinstance(b, SampledSketchB):
            a, b = b, a
        if not isinstance(b, SampledSketchB):
            raise ParamError("a gap query needs one gap sketch")
        r = gap_query(b, _raw_of(a), budget=budget)
        out = {"verdict": r.answer, "k": b.k}
        neg = not r.yes
    else:
        from .driver import ApproxConfig, ApproxPrep, approx_ed_noprep, approx_ed_prep

        seed = args.seed if args.seed is not None else 0
        eps = args.epsilon
        if isinstance(a, ApproxPrep):
            eps = a.eps
        cfg = ApproxConfig(eps=eps, seed=seed, c_s=args.c_s)
        if args.mode == "noprep":
            r = approx_ed_noprep(_raw_of(a), _raw_of(b), cfg)
        else:
            r = approx_ed_prep(a if isinstance(a, ApproxPrep) else _raw_of(a),
                               b if isinstance(b, ApproxPrep) else _raw_of(b), cfg)
        out = {"estimate": r.estimate, "mode": r.mode, "d": r.d, "delta": r.delta}
        for key in ("window_ed_queries", "prep_window_ed_queries", "equal_calls", "hash_compares"):
            setattr(budget, key, int(r.budget.get(key, 0)))
        neg = args.k is not None and r.estimate > args.k
    out["budget"] = {k: v for k, v in budget.snapshot().items() if k != "per_tau"}
    return out, neg


def _as_algo(obj, algo: str, args):
    """Build the sketch an algorithm needs from a raw operand (pass sketches through)."""
    if not isinstance(obj, TokenString):
        return obj
    if algo == "gap":
        return obj  # the query side stays raw
    return _build(obj, algo, args)


def _common_seed(objs, args) -> None:
    seeds = {s for s in map(_sketch_seed, objs) if s is not None}
    if len(seeds) > 1:
        raise ParamMismatch(f"sketches use different seeds: {sorted(seeds)}")
    if seeds:
        (s,) = seeds
        if args.seed is not None and args.seed != s:
            raise ParamMismatch(f"--seed {args.seed} differs from the sketch seed {s}")
        args.seed = s


def cmd_query(args) -> int:
    a, algo_a, name_a = _load_operand(args.a, args.format)
    b, algo_b, name_b = _load_operand(args.b, args.format)
    algos = {x for x in (algo_a, algo_b) if x is not None}
    if args.algo is not None:
        algos.add(args.algo)
    if len(algos) > 1:
        raise ParamMismatch(f"operands were built for different algorithms: {sorted(algos)}")
    if not algos:
        args.parser.error("--algo is required when both operands are raw")
    (algo,) = algos
    _common_seed((a, b), args)
    a, b = _as_algo(a, algo, args), _as_algo(b, algo, args)
    t0 = time.perf_counter()
    fields, neg = _pair_result(algo, a, b, args)
    rec = {"algo": algo, "a": name_a, "b": name_b, **fields,
           "elapsed": round(time.perf_counter() - t0, 6)}
    _emit(rec)
    return EXIT_NEGATIVE if neg else EXIT_OK


# ---------------------------------------------------------------------- join

def _join_inputs(args):
    """[(name, object)], algo, build count."""
    src = Path(args.source)
    if not src.exists():
        raise FileNotFoundError(f"no such file or directory: {src}")
    if src.is_dir():
        items, algos = [], set()
        for path in sorted(src.glob("*.edsk")):
            obj, algo, name = load(path)
            items.append((name or path.stem, obj))
            algos.add(algo)
        if len(algos) > 1:
            raise ParamMismatch(f"mixed algorithm ids in {src}: {sorted(algos)}")
        algo = algos.pop() if algos else (args.algo or "small-ed")
        if args.algo is not None and args.algo != algo:
            raise ParamMismatch(f"sketches in {src} are {algo}, not {args.algo}")
        return items, algo, 0
    if args.algo is None:
        args.parser.error("--algo is required when joining a record file")
    recs = read_records(src, args.format)
    items = [(r.name or f"record{i}", _build(r, args.algo, args)) for i, r in enumerate(recs)]
    return items, args.algo, len(items)


def cmd_join(args) -> int:
    items, algo, builds = _join_inputs(args)
    if algo == "gap":
        raise ParamError("join needs symmetric sketches; gap sketches only answer raw queries")
    _common_seed([obj for _, obj in items], args)
    if args.k is None and args.threshold is not None:
        args.k = args.threshold
    lengths = [getattr(getattr(obj, "sketch", obj), "n", 0) for _, obj in items]
    pairs = [(i, j) for i in range(len(items)) for j in range(i + 1, len(items))
             if args.band is None or abs(lengths[i] - lengths[j]) <= args.band]
    if algo == "perm-lcs":
        pairs = [(i, j) for i, j in pairs if lengths[i] == lengths[j]]

    def run(pair):
        i, j = pair
        t0 = time.perf_counter()
        fields, neg = _pair_result(algo, items[i][1], items[j][1], args)
        rec = {"a": items[i][0], "b": items[j][0], "algo": algo, **fields, "under": not neg}
        if args.timing:
            rec["elapsed"] = round(time.perf_counter() - t0, 6)
        return rec

    t0 = time.perf_counter()
    flagged = 0
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for rec in pool.map(run, pairs):
            flagged += rec["under"]
            _emit(rec)
    _note(f"join: {len(items)} strings, {len(pairs)} pairs, {flagged} under threshold, "
          f"{builds} builds, {time.perf_counter() - t0:.3f}s")
    return EXIT_OK


# -------------------------------------------------------------------- oracle

def cmd_oracle(args) -> int:
    from .oracle import ed_exact, lcs_exact

    a, _, name_a = _load_operand(args.a, args.format)
    b, _, name_b = _load_operand(args.b, args.format)
    ta, tb = _raw_of(a), _raw_of(b)
    rec = {"a": name_a, "b": name_b}
    if args.what in ("ed", "both"):
        rec["ed"] = ed_exact(ta, tb)
    if args.what in ("lcs", "both"):
        rec["lcs"] = lcs_exact(ta, tb)
    _emit(rec)
    return EXIT_OK


# --------------------------------------------------------------------- bench

def _ladder(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParamError(f"bad ladder {text!r}") from None
    if len(vals) < 2:
        raise ParamError("a ladder needs at least two values")
    return vals


def cmd_bench(args) -> int:
    from . import bench

    if args.bench_cmd == "generate":
        spec = bench.InstanceSpec(args.family, args.n, args.k, args.sigma, args.seed or 0, args.side)
        inst = bench.generate(spec)
        rec = inst.record()
        rec["check"] = bench.verify(inst)
        _emit(rec)
    elif args.bench_cmd == "scaling":
        kw = {"repetitions": args.reps, "seed": args.seed or 0}
        if args.n is not None:
            kw["n"] = args.n
        rep = bench.run_scaling(args.family, _ladder(args.ladder), **kw)
        for row in rep.rows:
            _emit({"family": rep.family, **row})
        _emit({"family": rep.family, "slope": round(rep.slope, 4), "x": rep.x, "y": rep.y})
        _note(f"{rep.family}: log-log slope of {rep.y} in {rep.x} = {rep.slope:.3f}")
    else:
        for rec in bench.compare_backends(args.n or 2048, args.seed or 0):
            _emit(rec)
    return EXIT_OK


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edsk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"edsk {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="shared hash seed (EDSK_SEED)")
    common.add_argument("--epsilon", type=float, default=None, help="accuracy (EDSK_EPSILON)")
    common.add_argument("--format", default="auto", choices=("auto", "text", "bytes", "fasta", "ints"))
    common.add_argument("--c-s", dest="c_s", type=float, default=1.0, help="sampling constant")
    sub = p.add_subparsers(dest="cmd", required=True)

    pp = sub.add_parser("preprocess", parents=[common], help="sketch every record of a file")
    pp.add_argument("input")
    pp.add_argument("--algo", required=True, choices=ALGOS)
    pp.add_argument("--k", type=int, default=None, help="distance parameter (gap)")
    pp.add_argument("--out", default=".")
    pp.add_argument("--no-raw", action="store_true", help="omit raw tokens from the sketch")
    pp.add_argument("--graphs", action="store_true", help="approx: materialize close-window graphs")
    pp.add_argument("--n-hint", type=int, default=None, help="approx: length of the longer string")
    pp.set_defaults(func=cmd_preprocess)

    pq = sub.add_parser("query", parents=[common], help="answer one query")
    pq.add_argument("a")
    pq.add_argument("b")
    pq.add_argument("--algo", choices=ALGOS, default=None)
    pq.add_argument("--k", type=int, default=None, help="threshold")
    pq.add_argument("--mode", choices=("prep", "noprep"), default="prep")
    pq.add_argument("--reconstruct", action="store_true", help="perm-lcs: report a block chain")
    pq.set_defaults(func=cmd_query)

    pj = sub.add_parser("join", parents=[common], help="all pairs of a sketch directory")
    pj.add_argument("source", help="directory of .edsk files or a record file")
    pj.add_argument("--algo", choices=ALGOS, default=None)
    pj.add_argument("--threshold", type=int, default=None)
    pj.add_argument("--band", type=int, default=None, help="skip pairs whose lengths differ more")
    pj.add_argument("--jobs", type=int, default=None, help="worker threads (EDSK_JOBS)")
    pj.add_argument("--mode", choices=("prep", "noprep"), default="prep")
    pj.add_argument("--no-timing", dest="timing", action="store_false",
                    help="leave wall-clock out of the records")
    pj.set_defaults(func=cmd_join, k=None, reconstruct=False)

    po = sub.add_parser("oracle", parents=[common], help="exact ED / LCS by dynamic programming")
    po.add_argument("a")
    po.add_argument("b")
    po.add_argument("--what", choices=("ed", "lcs", "both"), default="ed")
    po.set_defaults(func=cmd_oracle)

    pb = sub.add_parser("bench", parents=[common], help="generators, scaling and backends")
    bsub = pb.add_subparsers(dest="bench_cmd", required=True)
    bg = bsub.add_parser("generate", parents=[common])
    bg.add_argument("--family", required=True, choices=("block-moves", "planted-edits",
                                                        "gap-pair", "random-pair"))
    bg.add_argument("--n", type=int, required=True)
    bg.add_argument("--k", type=int, default=0)
    bg.add_argument("--sigma", type=int, default=4)
    bg.add_argument("--side", choices=("yes", "no"), default="yes")
    bs = bsub.add_parser("scaling", parents=[common])
    bs.add_argument("--family", required=True, choices=("small-ed", "perm-lcs", "prep", "noprep"))
    bs.add_argument("--ladder", required=True, help="comma-separated k (or n) values")
    bs.add_argument("--reps", type=int, default=1)
    bs.add_argument("--n", type=int, default=None)
    bb = bsub.add_parser("backends", parents=[common])
    bb.add_argument("--n", type=int, default=None)
    pb.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    try:
        _resolve(args)
        return args.func(args)
    except EdskError as exc:
        _note(f"edsk: error: {type(exc).__name__}: {exc}")
        return EXIT_ERROR
    except (OSError, UnicodeDecodeError) as exc:
        _note(f"edsk: error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
