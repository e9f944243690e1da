"""Seeded Monte Carlo replications and their aggregation into a result table.

Every (n, replication) pair is an independent task seeded by
``SeedSequence([seed_base, n, replication])``. Results are reassembled in
replication order and summed with ``math.fsum``, so the table does not
depend on the number of workers.
"""

from __future__ import annotations

import functools
import math
import os
import platform
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..componentwise import bosq, diag_known, diag_unknown, guillas
from ..errors import ARHError
from ..grid import Curve, make_grid, reconstruct_values, sine_basis
from ..metrics import (
    ErrorRecord,
    diag_operator_error,
    diag_truncated_error,
    full_error,
    kernel_truncated_error,
    ub_bound,
    xi,
)
from ..scenario import Regime, validate
from ..simulate import RNG_ALGORITHM, replication_seed, simulate
from ..smoothing import KernelConfig, SmootherConfig, WaveletConfig, as_predictor, besse_penalized_predictor, fit_kernel
from .config import CURVE_KINDS, BenchConfig
from .output import ResultRow, ResultTable

WORKERS_ENV = "ARHBENCH_WORKERS"
FAILURE_ABORT_SHARE = 0.5


@functools.lru_cache(maxsize=8)
def _context(spec, grid_step: float):
    ops = validate(spec)
    basis = sine_basis(make_grid(0.0, 4.0, grid_step), spec.M)
    return ops, basis


def _fit(kind: str, params: dict, series, k: int, ops, curves):
    if kind == "diag":
        return diag_unknown(series, k)
    if kind == "diag_known":
        return diag_known(series, k)
    if kind == "bosq":
        return bosq(series, k)
    if kind == "guillas":
        return guillas(series, k, params.get("beta_u", 0.9), true_C_eigs=ops.C_eigs)
    if kind == "wavelet":
        return as_predictor(curves, k, WaveletConfig(**params), scenario=ops)
    if kind == "besse":
        return besse_penalized_predictor(curves, SmootherConfig(**params))
    return fit_kernel(curves, KernelConfig(**params))


def _error(cfg: BenchConfig, kind: str, model, ops, basis, x, k: int) -> float:
    norm = cfg.error_norm
    if norm == "auto":
        norm = "full" if kind in ("besse", "kernel") else "truncated"
    if norm == "full":
        return full_error(ops.rho, model, basis, x)
    if ops.is_diagonal:
        return diag_truncated_error(ops.rho_diag, x, model, basis, k_n=k)
    return kernel_truncated_error(ops.rho, model, basis, k, x, cfg.kernel_error_mode)


def replicate(cfg: BenchConfig, n: int, replication: int) -> list[ErrorRecord]:
    """Simulate one sample path and score every configured method on it."""
    ops, basis = _context(cfg.scenario, cfg.grid_step)
    k = cfg.k_n(n)
    threshold = xi(cfg.threshold, n)
    series = simulate(ops, n, replication_seed(cfg.seed_base, n, replication))
    x = series.last
    curves = None
    if any(m.kind in CURVE_KINDS for m in cfg.methods):
        curves = [Curve(basis.grid, v) for v in reconstruct_values(series.data, basis)]
    out = []
    for m in cfg.methods:
        aux = {}
        t0 = time.perf_counter()
        try:
            model = _fit(m.kind, m.params, series, k, ops, curves)
            err = _error(cfg, m.kind, model, ops, basis, x, k)
            if not math.isfinite(err):
                raise ARHError("non-finite error norm")
            if m.kind == "diag" and ops.is_diagonal:
                aux["ub"] = ub_bound(series, ops.C_eigs, ops.rho_diag, k).total
                aux["op_err"] = diag_operator_error(model.rho_hat, ops.rho_diag, k)
            failed = False
        except (ARHError, np.linalg.LinAlgError) as exc:
            err, failed = math.inf, True
            aux["error"] = f"{type(exc).__name__}: {exc}"
        aux["wall_ms"] = 1e3 * (time.perf_counter() - t0)
        out.append(ErrorRecord(replication, n, k, m.name, err, err > threshold, aux, failed))
    return out


def _task(cfg: BenchConfig, job: tuple) -> list[ErrorRecord]:
    return replicate(cfg, *job)


@dataclass
class RunResult:
    table: ResultTable
    records: list = field(repr=False)
    diagnostics: list = field(default_factory=list)
    elapsed_s: float = 0.0


def aggregate(cfg: BenchConfig, records, timing: bool = False) -> tuple[ResultTable, list[str]]:
    """Collapse per-replication records into one row per (n, method).

    Failed replications count as exceedances. When more than half of a
    cell's replications fail, the cell is aborted: its count and error
    summaries are left blank and a diagnostic is emitted.
    """
    cells: dict = {}
    for r in records:
        cells.setdefault((r.n, r.method), []).append(r)
    rows, diagnostics = [], []
    for n in cfg.sample_sizes:
        for m in cfg.methods:
            recs = sorted(cells.get((n, m.name), []), key=lambda r: r.replication)
            ok = [r for r in recs if not r.failed]
            failures = len(recs) - len(ok)
            wall = math.fsum(r.aux.get("wall_ms", 0.0) for r in recs) if timing else None
            if failures > FAILURE_ABORT_SHARE * len(recs):
                first = next(r.aux.get("error") for r in recs if r.failed)
                diagnostics.append(
                    f"{cfg.scenario_id} {m.name} n={n}: {failures}/{len(recs)} replications failed ({first})"
                )
                rows.append(ResultRow(cfg.scenario_id, m.name, n, cfg.k_n(n), None, len(recs),
                                      None, None, None, failures, wall))
                continue
            errs = [r.error_norm for r in ok]
            ubs = [r.aux["ub"] for r in ok if "ub" in r.aux]
            rows.append(
                ResultRow(
                    scenario=cfg.scenario_id,
                    method=m.name,
                    n=n,
                    k_n=cfg.k_n(n),
                    f_num=sum(1 for r in recs if r.exceeded),
                    f_den=len(recs),
                    mean_err=math.fsum(errs) / len(errs),
                    median_err=float(statistics.median(errs)),
                    mean_ub=math.fsum(ubs) / len(ubs) if ubs else None,
                    failures=failures,
                    wall_ms=wall,
                )
            )
    return ResultTable(tuple(rows)), diagnostics


def resolve_workers(requested: int | None, cfg: BenchConfig) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return cfg.workers


def run(cfg: BenchConfig, workers: int | None = None, timing: bool = False) -> RunResult:
    """Run every replication of ``cfg`` and aggregate the results."""
    workers = resolve_workers(workers, cfg)
    if cfg.scenario.regime is not Regime.DIAGONAL and any(m.kind == "diag" for m in cfg.methods):
        raise ARHError("diagonal estimators need a diagonal scenario")
    _context(cfg.scenario, cfg.grid_step)
    jobs = [(n, l) for n in cfg.sample_sizes for l in range(cfg.replications)]
    fn = functools.partial(_task, cfg)
    t0 = time.perf_counter()
    if workers == 1:
        chunks = [fn(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    records = [r for chunk in chunks for r in chunk]
    table, diagnostics = aggregate(cfg, records, timing)
    return RunResult(table, records, diagnostics, time.perf_counter() - t0)


def run_metadata(cfg: BenchConfig, result: RunResult, workers: int) -> dict:
    import matplotlib
    import scipy

    return {
        "config": cfg.to_dict(),
        "rng": RNG_ALGORITHM,
        "seeds": {
            "seed_base": cfg.seed_base,
            "derivation": "SeedSequence([seed_base, n, replication]).generate_state(1, uint64)",
        },
        "k_n": {str(n): cfg.k_n(n) for n in cfg.sample_sizes},
        "threshold": {str(n): xi(cfg.threshold, n) for n in cfg.sample_sizes},
        "workers": workers,
        "elapsed_s": result.elapsed_s,
        "diagnostics": result.diagnostics,
        "versions": {
            "arhbench": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }
