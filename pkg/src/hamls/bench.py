"""Benchmark drivers: reference spectra, error tables, solver dispatch.

The error metrics compare a solver's Ritz values and the plain discrete
eigenvalues at mesh width h against reference eigenvalues from a much finer
mesh h0, all matched by magnitude-descending rank:

    delta_hat_j = |ref_j - approx_j| / |ref_j|     (method error)
    delta_j     = |ref_j - discrete_j| / |ref_j|   (discretisation error)
    gamma       = max_j delta_hat_j / delta_j      (j = 1..n_es)
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from pathlib import Path

import numpy as np
import scipy.linalg

from .amls import (OMEGA1_FIRST, AmlsConfig, FixedRank, dense_amls_solve,
                   partition_indices)
from .combined import combined_dense_amls_solve
from .dense_core import RitzPairs, direct_solve, select_by_magnitude
from .grid import DiscreteProblem, build_problem
from .hmatrix import (HMatrix, build_block_tree, build_cluster_tree,
                      hmatrix_approximate, storage_stats)
from .recursive import hamls_solve

DEFAULT_N = 200
DEFAULT_SPLIT = 0.5
DEFAULT_K = 5
DEFAULT_N_REF = 5000
CACHE_ENV = "AMLS_CACHE_DIR"


@dataclasses.dataclass(frozen=True)
class ErrorRow:
    j: int
    lambda_hat: float
    lambda_h: float
    lambda_ref: float
    delta_hat: float
    delta: float
    ratio: float


@dataclasses.dataclass(frozen=True)
class ErrorReport:
    rows: list[ErrorRow]
    gamma: float
    n_es: int
    h: float
    h0: float
    variant: str
    config: dict
    signs: dict


def cache_directory(cache_dir=None) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    return Path(os.environ.get(CACHE_ENV, "cache"))


def _reference_key(n_ref: int) -> str:
    return f"kernel=log|x-y| interval=[0,1] basis=piecewise-constant n={n_ref}"


def compute_reference(n_ref: int, count: int, cache_dir=None,
                      use_cache: bool = True) -> np.ndarray:
    """Largest-magnitude eigenvalues of the fine-mesh benchmark pencil.

    The mass matrix is h times the identity, so the pencil eigenvalues are
    eig(K)/h; the full spectrum is cached on disk keyed by (kernel, n_ref).
    """
    if count < 1 or count > n_ref:
        raise ValueError(f"count must be in [1, {n_ref}], got {count}")
    key = _reference_key(n_ref)
    digest = hashlib.sha256(key.encode()).hexdigest()[:16]
    path = cache_directory(cache_dir) / f"ref-{digest}.json"
    if use_cache and path.exists():
        payload = json.loads(path.read_text())
        if payload.get("key") == key:
            values = np.asarray(payload["values"])
            if values.size >= count:
                return values[:count]
    problem = build_problem(n_ref)
    w = scipy.linalg.eigvalsh(problem.K) / problem.grid.h
    values = w[select_by_magnitude(w)]
    if use_cache:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"key": key, "values": values.tolist()}))
    return values[:count]


def discrete_spectrum(problem: DiscreteProblem, count: int) -> np.ndarray:
    """Largest-magnitude eigenvalues of the assembled pencil, dense path."""
    return direct_solve(problem.K, problem.M, count).values


def make_error_report(approx: np.ndarray, discrete: np.ndarray,
                      reference: np.ndarray, n_es: int, variant: str = "",
                      config: dict | None = None, h: float = float("nan"),
                      h0: float = float("nan")) -> ErrorReport:
    """Per-eigenvalue relative errors, their ratios, and the worst ratio.

    A zero discretisation error (self-referencing runs) makes the ratio and
    gamma NaN rather than raising.
    """
    approx = np.asarray(approx, dtype=float)
    discrete = np.asarray(discrete, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if min(approx.size, discrete.size, reference.size) < n_es:
        raise ValueError(
            f"need {n_es} values, got "
            f"({approx.size}, {discrete.size}, {reference.size})")
    rows = []
    for j in range(n_es):
        ref = reference[j]
        dh = abs(ref - approx[j]) / abs(ref)
        d = abs(ref - discrete[j]) / abs(ref)
        ratio = dh / d if d != 0.0 else float("nan")
        rows.append(ErrorRow(j=j + 1, lambda_hat=float(approx[j]),
                             lambda_h=float(discrete[j]),
                             lambda_ref=float(ref), delta_hat=float(dh),
                             delta=float(d), ratio=float(ratio)))
    gamma = float(np.max([r.ratio for r in rows]))
    signs = {
        "approx": [int(np.sign(v)) for v in approx[:n_es]],
        "discrete": [int(np.sign(v)) for v in discrete[:n_es]],
        "reference": [int(np.sign(v)) for v in reference[:n_es]],
    }
    return ErrorReport(rows=rows, gamma=gamma, n_es=n_es, h=h, h0=h0,
                       variant=variant, config=dict(config or {}), signs=signs)


def format_report_text(report: ErrorReport) -> str:
    lines = [f"variant: {report.variant}   n_es={report.n_es}   "
             f"h={report.h:.3e}   h0={report.h0:.3e}",
             f"{'j':>4} {'delta_hat':>12} {'delta':>12} {'ratio':>12}"]
    for r in report.rows:
        lines.append(f"{r.j:>4} {r.delta_hat:>12.2e} {r.delta:>12.2e} "
                     f"{r.ratio:>12.2e}")
    lines.append(f"gamma_{report.n_es} = {report.gamma:.2e}")
    return "\n".join(lines)


def report_to_dict(report: ErrorReport, meta: dict | None = None,
                   timings: dict | None = None) -> dict:
    return {
        "meta": dict(meta or {}),
        "config": report.config,
        "rows": [dataclasses.asdict(r) for r in report.rows],
        "gamma": report.gamma,
        "signs": report.signs,
        "timings": dict(timings or {}),
    }


# ---------------------------------------------------------------------------
# solver dispatch


def build_hmatrices(problem: DiscreteProblem, eta: float, n_min: int,
                    epsilon: float) -> tuple[HMatrix, HMatrix]:
    """Compress the assembled pencil into H-form over one shared tree."""
    ct = build_cluster_tree(problem.grid.nodal_points, n_min,
                            support_radius=0.5 * problem.grid.h)
    bct = build_block_tree(ct, ct, eta)
    return (hmatrix_approximate(problem.K, bct, epsilon),
            hmatrix_approximate(problem.M, bct, epsilon))


def solve_variant(method: str, problem: DiscreteProblem, config: AmlsConfig,
                  split: float = DEFAULT_SPLIT,
                  orientation: str = OMEGA1_FIRST,
                  trace: list | None = None) -> RitzPairs:
    """Run one solver method on an assembled problem."""
    if method == "direct":
        return direct_solve(problem.K, problem.M, config.n_es)
    if method == "amls":
        part = partition_indices(problem.grid, split, orientation)
        return dense_amls_solve(problem, part, config)
    if method == "combined":
        return combined_dense_amls_solve(problem, split, config)
    if method == "hamls":
        K_h, M_h = build_hmatrices(problem, config.eta, config.n_min,
                                   config.h_accuracy)
        return hamls_solve(K_h, M_h, config, trace=trace)
    raise ValueError(f"unknown method {method!r}")


def benchmark_table(method: str, n: int = DEFAULT_N,
                    n_ref: int = DEFAULT_N_REF, k: int = DEFAULT_K,
                    n_es: int | None = None, split: float = DEFAULT_SPLIT,
                    cache_dir=None, use_cache: bool = True,
                    orientation: str = OMEGA1_FIRST) -> tuple[ErrorReport, dict]:
    """Error table of one method against the fine-mesh reference."""
    t0 = time.perf_counter()
    problem = build_problem(n)
    t_assemble = time.perf_counter() - t0
    config = AmlsConfig(k_rule=FixedRank(k, k), n_es=n_es or 2 * k)
    t0 = time.perf_counter()
    pairs = solve_variant(method, problem, config, split=split,
                          orientation=orientation)
    t_solve = time.perf_counter() - t0
    n_es = pairs.values.size
    t0 = time.perf_counter()
    discrete = discrete_spectrum(problem, n_es)
    t_discrete = time.perf_counter() - t0
    t0 = time.perf_counter()
    reference = compute_reference(n_ref, n_es, cache_dir=cache_dir,
                                  use_cache=use_cache)
    t_reference = time.perf_counter() - t0
    config_echo = {
        "method": method, "n": n, "n_ref": n_ref, "k1": k, "k2": k,
        "n_es": n_es, "split": split, "orientation": orientation,
        "drop_tol": config.drop_tol, "subspace_dim": pairs.subspace_dim,
    }
    report = make_error_report(pairs.values, discrete, reference, n_es,
                               variant=method, config=config_echo,
                               h=problem.grid.h, h0=1.0 / n_ref)
    timings = {"assemble": t_assemble, "solve": t_solve,
               "discrete": t_discrete, "reference": t_reference}
    return report, timings


def hmatrix_stats(n: int, epsilon: float = 1e-6, eta: float = 1.0,
                  n_min: int = 32) -> dict:
    """Compression accuracy and storage accounting for the benchmark K."""
    problem = build_problem(n)
    t0 = time.perf_counter()
    K_h, _ = build_hmatrices(problem, eta, n_min, epsilon)
    build_time = time.perf_counter() - t0
    D = K_h.to_dense()
    err = (np.linalg.norm(problem.K - D, "fro")
           / np.linalg.norm(problem.K, "fro"))
    s = storage_stats(K_h)
    return {
        "n": n, "epsilon": epsilon, "eta": eta, "n_min": n_min,
        "stored_reals": s.stored_reals, "max_rank": s.max_rank,
        "compression_ratio": s.compression_ratio,
        "frobenius_error": float(err), "build_time": build_time,
    }
