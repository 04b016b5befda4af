"""Command-line harness: assembly, solving, error tables, exports."""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bench, io
from .amls import AmlsConfig, FixedRank, FullRank, OMEGA1_FIRST, OMEGA2_FIRST, PowerRank
from .errors import AmlsError
from .grid import build_problem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=bench.DEFAULT_N,
                   help="number of cells (default %(default)s)")
    p.add_argument("--split", type=float, default=bench.DEFAULT_SPLIT,
                   help="subdomain split point (default %(default)s)")
    p.add_argument("--k1", type=int, default=bench.DEFAULT_K,
                   help="modes kept from the leading subproblem")
    p.add_argument("--k2", type=int, default=bench.DEFAULT_K,
                   help="modes kept from the Schur subproblem")
    p.add_argument("--full-selection", action="store_true",
                   help="keep every subproblem mode (exact subspace)")
    p.add_argument("--c", type=float, default=None,
                   help="power mode-selection constant (enables the rule)")
    p.add_argument("--beta", type=float, default=1.0 / 3.0,
                   help="power mode-selection exponent (default %(default)s)")
    p.add_argument("--eps", type=float, default=1e-8,
                   help="H-arithmetic accuracy (default %(default)s)")
    p.add_argument("--eta", type=float, default=1.0,
                   help="admissibility parameter (default %(default)s)")
    p.add_argument("--nmin", type=int, default=32,
                   help="cluster leaf size (default %(default)s)")
    p.add_argument("--recursion-threshold", type=int, default=64,
                   help="direct-solve size for the recursive method")
    p.add_argument("--nes", type=int, default=None,
                   help="number of sought eigenpairs")
    p.add_argument("--drop-tol", type=float, default=1e-8,
                   help="dependent-column drop tolerance")
    p.add_argument("--orientation", choices=[OMEGA1_FIRST, OMEGA2_FIRST],
                   default=OMEGA1_FIRST, help="index ordering for `amls`")


def _config_from_args(args) -> AmlsConfig:
    if args.full_selection:
        k_rule = FullRank()
    elif args.c is not None:
        k_rule = PowerRank(c=args.c, beta=args.beta)
    else:
        k_rule = FixedRank(args.k1, args.k2)
    n_es = args.nes if args.nes is not None else args.k1 + args.k2
    return AmlsConfig(k_rule=k_rule, n_es=n_es, drop_tol=args.drop_tol,
                      recursion_threshold=args.recursion_threshold,
                      h_accuracy=args.eps, eta=args.eta, n_min=args.nmin)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamls",
        description="Eigensolvers for dense integral-operator pencils")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap BLAS threads for reproducible runs")
    parser.add_argument("--cache-dir", default=None,
                        help="reference spectrum cache directory")
    parser.add_argument("--no-cache", action="store_true",
                        help="recompute reference spectra from scratch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="write K and M in Matrix Market form")
    p.add_argument("--n", type=int, default=bench.DEFAULT_N)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("solve", help="run one solver and print its values")
    p.add_argument("--method", required=True,
                   choices=["direct", "amls", "combined", "hamls"])
    _add_solver_flags(p)
    p.add_argument("--json", default=None, help="write results to this file")
    p.add_argument("--trace", action="store_true",
                   help="print per-level recursion records (hamls only)")

    p = sub.add_parser("bench", help="error tables against the fine reference")
    p.add_argument("table", choices=["table2", "table3"],
                   help="table2: single-orientation; table3: combined")
    p.add_argument("--n", type=int, default=bench.DEFAULT_N)
    p.add_argument("--nref", type=int, default=bench.DEFAULT_N_REF)
    p.add_argument("--k", type=int, default=bench.DEFAULT_K)
    p.add_argument("--nes", type=int, default=None)
    p.add_argument("--split", type=float, default=bench.DEFAULT_SPLIT)
    p.add_argument("--json", default=None, help="write the report here")

    p = sub.add_parser("export-eigenfunctions",
                       help="CSV series of the leading Ritz vectors")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--method", default="combined",
                   choices=["direct", "amls", "combined", "hamls"])
    _add_solver_flags(p)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("href-stats", help="H-compression report")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--nmin", type=int, default=32)
    p.add_argument("--scaling", action="store_true",
                   help="also report a size/time table over growing n")
    p.add_argument("--blocks", default=None,
                   help="write the block-tree description (coordinates, "
                        "admissibility, ranks) to this JSON file")
    p.add_argument("--json", default=None)
    return parser


def _cmd_assemble(args) -> int:
    problem = build_problem(args.n)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_stiffness_matrix_market(out / f"stiffness_n{args.n}.mtx",
                                     problem.K)
    io.write_mass_matrix_market(out / f"mass_n{args.n}.mtx", problem.M)
    print(f"wrote stiffness_n{args.n}.mtx and mass_n{args.n}.mtx to {out}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    problem = build_problem(args.n)
    config = _config_from_args(args)
    trace: list | None = [] if args.trace else None
    pairs = bench.solve_variant(args.method, problem, config,
                                split=args.split,
                                orientation=args.orientation, trace=trace)
    payload = {
        "method": args.method, "n": args.n,
        "values": pairs.values.tolist(),
        "subspace_dim": pairs.subspace_dim,
    }
    if args.method == "hamls":
        # N ~ 2^l * threshold; reported, never asserted
        payload["expected_recursion_depth"] = max(
            0, math.ceil(math.log2(args.n / config.recursion_threshold)))
        if trace is not None:
            payload["observed_recursion_depth"] = (
                1 + max((r["depth"] for r in trace), default=-1))
    if trace is not None:
        payload["trace"] = trace
    text = json.dumps(payload, indent=2)
    if args.json:
        Path(args.json).write_text(text)
    print(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    method = "amls" if args.table == "table2" else "combined"
    n_es = args.nes if args.nes is not None else (10 if method == "amls"
                                                  else 20)
    report, timings = bench.benchmark_table(
        method, n=args.n, n_ref=args.nref, k=args.k, n_es=n_es,
        split=args.split, cache_dir=args.cache_dir,
        use_cache=not args.no_cache)
    meta = {
        "table": args.table,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    payload = bench.report_to_dict(report, meta=meta, timings=timings)
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2))
    print(bench.format_report_text(report))
    return EXIT_OK


def _cmd_export(args) -> int:
    problem = build_problem(args.n)
    config = _config_from_args(args)
    if args.nes is None:
        config = dataclasses.replace(config,
                                     n_es=max(args.count, config.n_es))
    pairs = bench.solve_variant(args.method, problem, config,
                                split=args.split,
                                orientation=args.orientation)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for j in range(min(args.count, pairs.values.size)):
        path = out / f"eigenfunction_{args.method}_n{args.n}_{j + 1}.csv"
        io.write_eigenfunction_csv(path, problem.grid, pairs.vectors[:, j])
    print(f"wrote {min(args.count, pairs.values.size)} series to {out}")
    return EXIT_OK


def _cmd_href_stats(args) -> int:
    sizes = [256, 512, 1024, 2048] if args.scaling else [args.n]
    rows = [bench.hmatrix_stats(n, epsilon=args.eps, eta=args.eta,
                                n_min=args.nmin) for n in sizes]
    if args.blocks:
        problem = build_problem(args.n)
        K_h, _ = bench.build_hmatrices(problem, args.eta, args.nmin, args.eps)
        Path(args.blocks).write_text(json.dumps(K_h.block_report(), indent=2))
    payload = rows if args.scaling else rows[0]
    text = json.dumps(payload, indent=2)
    if args.json:
        Path(args.json).write_text(text)
    print(text)
    return EXIT_OK


_COMMANDS = {
    "assemble": _cmd_assemble,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "export-eigenfunctions": _cmd_export,
    "href-stats": _cmd_href_stats,
}


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    limits = contextlib.nullcontext()
    if args.threads is not None:
        import threadpoolctl
        limits = threadpoolctl.threadpool_limits(limits=args.threads)
    try:
        with limits:
            return _COMMANDS[args.command](args)
    except (AmlsError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
