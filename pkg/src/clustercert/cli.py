"""Command-line front end: ``clustercert {sample,seminorm,search,bound,verify}``.

Exit codes: 0 success (certificate found), 2 validation or I/O error,
3 search exhausted without a certificate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path


from . import formats
from .clustering import ClusterQuery, cluster_search, depth_bound_terms, k_star, partition_csv, superlevel_count
from .embedding import embedding_constant
from .errors import ClusterCertError
from .functions import FunctionSpec, sample, select_corpus
from .geometry import Cube, GridFunction, GridSpec
from .reductions import ReductionInput, corollary_pipeline, verify_scaling
from .seminorms import (
    FractionalParams,
    bv_seminorm,
    default_workers,
    difference_profile,
    gagliardo,
    gagliardo_naive,
    grad_lp,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_EXHAUSTED = 3

DEFAULT_M = {1: 240, 2: 120, 3: 24}
EMBEDDING_SLACK = 1.05
SCALING_TOL = 1e-12


class UsageError(ClusterCertError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# --------------------------------------------------------------------------
# argument plumbing

def _floats(text) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def parse_grid(text: str) -> GridSpec:
    """``"N"`` or ``"N,m"`` or ``"N,m,c_1,...,c_N,side"``; unit cube at the origin by default."""
    parts = [x.strip() for x in str(text).split(",") if x.strip()]
    try:
        dim = int(parts[0])
        if dim < 1:
            raise ValueError
        m = int(parts[1]) if len(parts) > 1 else DEFAULT_M.get(dim, 8)
        if len(parts) <= 2:
            return GridSpec(Cube.unit(dim), m)
        if len(parts) != 3 + dim:
            raise ValueError
        center = tuple(float(x) for x in parts[2 : 2 + dim])
        return GridSpec(Cube(center, float(parts[-1])), m)
    except (ValueError, IndexError):
        raise UsageError(f"--grid expects 'N,m,center_1..center_N,side', got {text!r}") from None


def parse_function(text: str, seed: int | None) -> FunctionSpec:
    path = Path(text)
    raw = path.read_text() if not text.lstrip().startswith("{") and path.exists() else text
    try:
        data = json.loads(raw)
    except json.JSONDecodeError:
        raise UsageError(f"--function must be FunctionSpec JSON or a path to one, got {text!r}") from None
    if not isinstance(data, dict):
        raise UsageError("--function JSON must be an object")
    fspec = FunctionSpec.from_dict(data)
    if fspec.family == "random-trig" and "seed" not in fspec.params and seed is not None:
        fspec = FunctionSpec(fspec.family, {**fspec.params, "seed": seed})
    return fspec


def load_input(args) -> GridFunction:
    if args.input:
        path = Path(args.input)
        if not path.is_file():
            raise UsageError(f"input file not found: {args.input}")
        return formats.read_grid_function(path)
    if not args.function:
        raise UsageError("give --input FILE or --function SPEC with --grid")
    return sample(parse_function(args.function, args.seed), parse_grid(args.grid or "2"))


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _params(args) -> FractionalParams:
    _require(args, "s", "p")
    return FractionalParams(float(args.s), float(args.p))


def _workers(args) -> int:
    return default_workers() if args.workers is None else max(1, int(args.workers))


def _config_dict(args) -> dict:
    skip = {"func", "config", "output", "plot_data"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, payload: dict) -> None:
    text = formats.dumps(payload)
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands

def cmd_sample(args) -> int:
    u = load_input(args)
    if not args.output:
        raise UsageError("sample needs --output FILE")
    formats.write_grid_function(u, args.output)
    levels = args.level or []
    summary = {
        "output": str(args.output),
        "dim": u.dim,
        "m": u.m,
        "cells": u.spec.n_cells,
        "min": float(u.values.min()),
        "max": float(u.values.max()),
        "superlevel_fractions": {repr(float(c)): superlevel_count(u, c) / u.spec.n_cells for c in levels},
    }
    sys.stdout.write(formats.dumps(summary))
    return EXIT_OK


def cmd_seminorm(args) -> int:
    u = load_input(args)
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    bad = set(which) - {"gagliardo", "grad", "bv"}
    if bad or not which:
        raise UsageError(f"--which takes a subset of gagliardo,grad,bv; got {args.which!r}")
    out: dict = {"dim": u.dim, "m": u.m, "side": u.cube.side}
    if "gagliardo" in which:
        params = _params(args)
        g = gagliardo(u, params, _workers(args))
        out["gagliardo"] = g
        out["s"], out["p"] = params.s, params.p
        if args.oracle:
            ref = gagliardo_naive(u, params)
            out["oracle"] = {"gagliardo_naive": ref, "relative_gap": abs(g - ref) / max(ref, 1e-300) if ref else abs(g)}
    if "grad" in which:
        _require(args, "p")
        out["grad_lp"] = grad_lp(u, float(args.p))
    if "bv" in which:
        out["bv"] = bv_seminorm(u)
    _emit(args, out)
    return EXIT_OK


def cmd_search(args) -> int:
    u = load_input(args)
    if u.dim == 1:
        warnings.warn("the clustering theorem is stated for N >= 2; results for N = 1 are exploratory")
    _require(args, "c", "alpha", "delta", "lam")
    reports: list = []
    if args.corollary:
        _require(args, "gamma_prime", "s")
        p = 1.0 if args.corollary == "bv" else float(args.p if args.p is not None else 1.0)
        if args.corollary == "bv" and args.p not in (None, 1, 1.0):
            warnings.warn("--corollary bv forces p = 1")
        inp = ReductionInput(args.corollary, args.gamma_prime, FractionalParams(float(args.s), p))
        cert = corollary_pipeline(
            u,
            args.c,
            args.alpha,
            args.delta,
            args.lam,
            inp,
            method="ball-bound" if args.rigorous else "quadrature",
            workers=_workers(args),
            collect_reports=reports,
        )
        query = ClusterQuery(args.c, args.alpha, cert.reduction["gamma"], args.delta, args.lam, inp.params)
    else:
        _require(args, "gamma")
        query = ClusterQuery(args.c, args.alpha, args.gamma, args.delta, args.lam, _params(args))
        cert = cluster_search(u, query, _workers(args), reports)
    payload = {"certificate": cert.to_dict(), "partitions": [r.to_dict() for r in reports] if args.verbose else None}
    if payload["partitions"] is None:
        payload.pop("partitions")
    if args.plot_data:
        Path(args.plot_data).write_text(partition_csv(u, query, reports))
    _emit(args, payload)
    if not cert.found:
        reasons = []
        if not cert.hypothesis_a:
            reasons.append(f"hypothesis (a) failed (measured fraction {cert.alpha_measured:.6g} <= alpha)")
        if not cert.hypothesis_b:
            reasons.append(f"hypothesis (b) failed (measured gamma {cert.gamma_measured:.6g} > gamma)")
        print("no certificate: " + ("; ".join(reasons) or "search exhausted"), file=sys.stderr)
        return EXIT_EXHAUSTED
    return EXIT_OK


def cmd_bound(args) -> int:
    _require(args, "alpha", "gamma", "delta", "lam")
    dim = args.dim if args.dim is not None else (parse_grid(args.grid).dim if args.grid else None)
    if dim is None:
        raise UsageError("bound needs --dim N (or --grid)")
    if dim < 2:
        warnings.warn("the depth bound is derived for N >= 2")
    query = ClusterQuery(args.c or 1.0, args.alpha, args.gamma, args.delta, args.lam, _params(args))
    kst = k_star(query, dim)
    _emit(
        args,
        {
            "dim": dim,
            "query": {k: v for k, v in query.to_dict().items() if k != "c"},
            "ps": query.params.p * query.params.s,
            "terms": depth_bound_terms(query, dim),
            "k_star": kst,
            "eta_lower_bound": 1.0 / kst,
        },
    )
    return EXIT_OK


def scaling_rows(entries, dim, s_list, p_list, m, sides, workers):
    """One row per (function, seminorm, s, p, side) for the rehosting identities."""
    rows = []

    def row(entry, which, s, p, rep):
        return {
            "suite": "scaling",
            "function": entry.name,
            "dim": dim,
            "m": m,
            "seminorm": which,
            "s": s,
            "p": p,
            "side": rep.side,
            "lhs": rep.lhs,
            "rhs": rep.rhs,
            "ratio": rep.rel_error,
            "bound": SCALING_TOL,
            "pass": rep.rel_error <= SCALING_TOL,
        }

    for entry in entries:
        base = sample(entry.fspec, GridSpec(Cube.unit(dim), m))
        hosted = [base.rehost(Cube((0.0,) * dim, r)) for r in sides]
        for p in p_list:
            profile = difference_profile(base, p, 1, workers)
            for u in hosted:
                for s in s_list:
                    params = FractionalParams(s, p)
                    rows.append(row(entry, "gagliardo", s, p, verify_scaling(u, "gagliardo", params, workers, profile)))
                rows.append(row(entry, "grad", None, p, verify_scaling(u, "grad", FractionalParams(0.5, p))))
        for u in hosted:
            rows.append(row(entry, "bv", None, None, verify_scaling(u, "bv", FractionalParams(0.5, 1.0))))
    return rows


def embedding_rows(entries, dim, s_list, p_list, m, workers):
    """Discrete ``[v]_{s,p} <= slack * C * ||grad v||_p`` (and the BV analogue with ``p = 1``)."""
    rows = []
    for entry in entries:
        v = sample(entry.fspec, GridSpec(Cube.unit(dim), m))
        ps = [1.0] if entry.kind == "bv" else p_list
        for p in ps:
            profile = difference_profile(v, p, 1, workers)
            rhs_norm = bv_seminorm(v) if entry.kind == "bv" else grad_lp(v, p)
            for s in s_list:
                params = FractionalParams(s, p)
                lhs = gagliardo(v, params, workers, profile)
                const = embedding_constant(dim, params).value
                rhs = const * rhs_norm
                ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
                rows.append(
                    {
                        "suite": "embedding",
                        "function": entry.name,
                        "kind": entry.kind,
                        "dim": dim,
                        "m": m,
                        "s": s,
                        "p": p,
                        "norm": "bv" if entry.kind == "bv" else "grad_lp",
                        "C": const,
                        "lhs": lhs,
                        "rhs": rhs,
                        "ratio": ratio,
                        "bound": EMBEDDING_SLACK,
                        "pass": ratio <= EMBEDDING_SLACK,
                    }
                )
    return rows


def _refine_rows(entries, dim, s_list, p_list, ms, workers):
    rows = []
    for entry in entries:
        for p in p_list:
            for s in s_list:
                prev = None
                for m in ms:
                    v = sample(entry.fspec, GridSpec(Cube.unit(dim), m))
                    g = gagliardo(v, FractionalParams(s, p), workers)
                    rows.append(
                        {
                            "suite": "refine",
                            "function": entry.name,
                            "dim": dim,
                            "m": m,
                            "s": s,
                            "p": p,
                            "lhs": g,
                            "rhs": prev,
                            "ratio": (g / prev) if prev else None,
                            "bound": None,
                            "pass": True,
                        }
                    )
                    prev = g
    return rows


def _rows_csv(rows) -> str:
    keys: list[str] = []
    for row in rows:
        keys += [k for k in row if k not in keys]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else repr(row[k]) if isinstance(row.get(k), float) else row[k]) for k in keys})
    return buf.getvalue()


def cmd_verify(args) -> int:
    suite = args.suite
    dims = [int(x) for x in _floats(args.dims)] if args.dims else [2]
    s_list = _floats(args.s) if args.s is not None else [0.25, 0.5, 0.75]
    p_list = _floats(args.p) if args.p is not None else [1.0, 2.0]
    kinds = [k for k in (args.corpus or "").split(",") if k]
    names = [k for k in (args.names or "").split(",") if k]
    for s in s_list:
        FractionalParams(s, 1.0)
    for p in p_list:
        FractionalParams(0.5, p)
    workers = _workers(args)
    rows = []
    for dim in dims:
        default_kinds = ["smooth", "bv"] if suite == "embedding" else None
        entries = select_corpus(dim, kinds or default_kinds, names or None)
        if not entries:
            raise UsageError("corpus selection is empty")
        if suite == "scaling":
            m = args.m or 24
            rows += scaling_rows(entries, dim, s_list, p_list, m, _floats(args.sides), workers)
        elif suite == "embedding":
            rows += embedding_rows(entries, dim, s_list, p_list, args.m or 48, workers)
        else:
            base = args.m or 12
            rows += _refine_rows(entries, dim, s_list, p_list, [base, 2 * base, 4 * base], workers)
    ok = all(r["pass"] for r in rows)
    _emit(args, {"suite": suite, "config": _config_dict(args), "rows": rows, "n_rows": len(rows), "all_pass": ok})
    if args.plot_data:
        Path(args.plot_data).write_text(_rows_csv(rows))
    return EXIT_OK if ok else 1


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (command-line flags override it)")
    common.add_argument("--input", help="GridFunction JSON file")
    common.add_argument("--output", help="write the JSON result here as well as to stdout")
    common.add_argument("--function", help="FunctionSpec JSON (inline or a file path)")
    common.add_argument("--grid", help="'N,m,center_1..center_N,side' (or just 'N' / 'N,m' for the unit cube)")
    common.add_argument("--workers", type=int, help="worker threads (default: $CLUSTERCERT_WORKERS or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for random-trig functions without one")
    common.add_argument("--plot-data", dest="plot_data", help="write tabular CSV output here")

    frac = _Parser(add_help=False)
    frac.add_argument("--s", type=float)
    frac.add_argument("--p", type=float)

    query = _Parser(add_help=False)
    query.add_argument("--c", type=float)
    query.add_argument("--alpha", type=float)
    query.add_argument("--gamma", type=float)
    query.add_argument("--delta", type=float)
    query.add_argument("--lambda", dest="lam", type=float)

    parser = _Parser(prog="clustercert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="sample a test function on a grid")
    p.add_argument("--level", type=float, action="append", help="report the superlevel fraction at this level")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("seminorm", parents=[common, frac], help="Gagliardo / gradient / BV seminorms")
    p.add_argument("--which", default="gagliardo,grad,bv")
    p.add_argument("--oracle", action="store_true", help="cross-check against the naive double loop")
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("search", parents=[common, frac, query], help="search for a clustering certificate")
    p.add_argument("--corollary", choices=["w1p", "bv"])
    p.add_argument("--gamma-prime", dest="gamma_prime", type=float)
    p.add_argument("--rigorous", action="store_true", help="reduce budgets with the ball-bound constant")
    p.add_argument("--verbose", action="store_true", help="include every partition report in the JSON")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("bound", parents=[common, frac, query], help="the partition-depth bound k*")
    p.add_argument("--dim", type=int)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("verify", parents=[common], help="scaling / embedding / refinement sweeps")
    p.add_argument("--suite", choices=["scaling", "embedding", "refine"], default="scaling")
    p.add_argument("--corpus", help="comma-separated kinds: smooth,lipschitz,bv")
    p.add_argument("--names", help="comma-separated corpus entry names")
    p.add_argument("--dims", default="2")
    p.add_argument("--m", type=int)
    p.add_argument("--sides", default="0.5,2,3")
    p.add_argument("--s", help="comma-separated orders s")
    p.add_argument("--p", help="comma-separated exponents p")
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {args.config}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(data) - known - {"command"}
    if unknown:
        raise UsageError("unknown config keys: " + ", ".join(sorted(unknown)))
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in data.items() if k != "command"})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
            args = _apply_config(parser, argv)
            return args.func(args)
    except (ClusterCertError, OSError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
