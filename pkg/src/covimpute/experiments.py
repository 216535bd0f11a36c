"""Monte Carlo experiments behind the CLI: the missingness grid, sampling
distributions of the slope, and the single-dataset analysis report.

Substreams: every grid cell, replicate and method gets
``RngStream(seed, derive_stream_id(command, index, label))``, so outputs do
not depend on thread count or scheduling.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import CovImputeError, InsufficientData, InvalidConfig
from .imputer import ALL_METHODS, ImputationMethod, impute, impute_multiple
from .inference import bootstrap_se, fit_complete_case, fit_full, fit_outcome, pool_rubin
from .io import format_real
from .numcore import sample_covariance, sample_variance
from .scenario import Dataset, ScenarioParams, expected_coefficient_variances, generate, theory_quantities
from .stochastics import RngStream, derive_stream_id

SCHEMA_VERSION = 1


def stream(seed: int, *labels) -> RngStream:
    return RngStream(seed, derive_stream_id(*labels))


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# --------------------------------------------------------------------------
# grid over Pr(R_X = 1 | Z = 1)


@dataclass(frozen=True)
class GridRecord:
    p_miss_1: float
    method: str
    n: int
    seed: int
    var_ximp: float
    cov_ximp_y: float
    beta1: float
    theory_var: float
    theory_cov: float
    theory_beta1: float


GRID_COLUMNS = tuple(GridRecord.__dataclass_fields__)


def grid_cell(params: ScenarioParams, p: float, index: int, n: int, seed: int) -> list[GridRecord]:
    cell = params.with_(p_miss_1=p)
    data = generate(cell, n, stream(seed, "grid", index, "data"))
    theory = theory_quantities(cell)
    records = []
    for method in ALL_METHODS:
        rng = stream(seed, "grid", index, method.name) if method.stochastic else None
        x_imp = impute(data, method, rng).x_imp
        var = sample_variance(x_imp)
        cov = sample_covariance(x_imp, data.y)
        records.append(
            GridRecord(
                p_miss_1=p,
                method=method.name,
                n=n,
                seed=seed,
                var_ximp=var,
                cov_ximp_y=cov,
                beta1=cov / var,
                theory_var=theory.imputed_var[method.name],
                theory_cov=theory.imputed_cov[method.name],
                theory_beta1=theory.expected_beta[method.name],
            )
        )
    return records


def run_grid(params: ScenarioParams, p_grid: Sequence[float], n: int, seed: int, threads: int = 1) -> list[GridRecord]:
    """One n-row dataset per grid value, imputed with all four methods."""
    cells = _map(lambda item: grid_cell(params, item[1], item[0], n, seed), list(enumerate(p_grid)), threads)
    return [rec for cell in cells for rec in cell]


def grid_to_csv(records: Sequence[GridRecord]) -> str:
    lines = [",".join(GRID_COLUMNS)]
    for rec in records:
        row = []
        for name in GRID_COLUMNS:
            value = getattr(rec, name)
            row.append(format_real(value) if isinstance(value, float) else str(value))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# sampling distribution of the slope


def _replicate(params: ScenarioParams, method: ImputationMethod, n: int, seed: int, r: int):
    """(beta, model variance) for the imputed, full-cohort and complete-case fits."""
    rng = stream(seed, "sampling", r)
    data = generate(params, n, rng)
    try:
        imp = fit_outcome(impute(data, method, rng if method.stochastic else None))
        full = fit_full(data)
        cc = fit_complete_case(data)
    except CovImputeError:
        return None
    return (
        imp.beta1_hat, imp.var_beta1_model,
        full.beta1_hat, full.var_beta1_model,
        cc.beta1_hat, cc.var_beta1_model,
    )


def _summarize(beta: np.ndarray, model_var: np.ndarray) -> dict:
    return {
        "mean_beta1": float(beta.mean()),
        "empirical_var_beta1": float(beta.var(ddof=1)),
        "mean_model_var": float(model_var.mean()),
    }


def run_sampling(
    params: ScenarioParams,
    method: ImputationMethod,
    n: int,
    replications: int,
    seed: int,
    threads: int = 1,
    chunk: int = 250,
) -> dict:
    """Repeat generate -> impute -> fit ``replications`` times.

    Replicates whose data cannot be fitted (possible at tiny ``n``) are
    dropped and counted.
    """
    if replications < 100:
        raise InvalidConfig(f"sampling needs at least 100 replications, got {replications}")
    if n < 3:
        raise InsufficientData("sampling needs n >= 3")
    bounds = [(lo, min(lo + chunk, replications)) for lo in range(0, replications, chunk)]

    def run_chunk(bound):
        return [_replicate(params, method, n, seed, r) for r in range(*bound)]

    rows = [row for part in _map(run_chunk, bounds, threads) for row in part]
    kept = np.array([row for row in rows if row is not None])
    if kept.shape[0] < 2:
        raise InsufficientData("fewer than two replicates succeeded")

    expected = None
    theory = None
    try:
        tq = theory_quantities(params)
        expected = asdict(expected_coefficient_variances(params, n))
        theory = {"expected_beta1": tq.expected_beta[method.name], "expected_variances": expected}
    except CovImputeError:
        pass

    return {
        "schema_version": SCHEMA_VERSION,
        "command": "sampling",
        "method": method.name,
        "n": n,
        "seed": seed,
        "replications": replications,
        "skipped": replications - int(kept.shape[0]),
        "imputed": _summarize(kept[:, 0], kept[:, 1]),
        "full_cohort": _summarize(kept[:, 2], kept[:, 3]),
        "complete_case": _summarize(kept[:, 4], kept[:, 5]),
        "theory": theory,
    }


# --------------------------------------------------------------------------
# analysis of one dataset


def analyze(dataset: Dataset, method: ImputationMethod, seed: int, m: int = 1, bootstrap: int = 0, threads: int = 1) -> dict:
    """Impute, fit the outcome model and attach the requested variance estimates.

    With a stochastic method and ``m >= 2`` the estimate and standard error
    come from Rubin pooling; otherwise from a single imputation, with the
    model-based (fixed-imputation) standard error.
    """
    if m > 1 and not method.stochastic:
        raise InvalidConfig("m > 1 requires a stochastic method")
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "method": method.name,
        "seed": seed,
        "n": dataset.n,
        "n_missing": dataset.n_missing,
        "m": m,
    }
    rng = stream(seed, "analyze", "impute")
    if m > 1:
        fits = [fit_outcome(imp) for imp in impute_multiple(dataset, method, m, rng)]
        pooled = pool_rubin(fits)
        report.update(
            estimate=pooled.q_bar,
            intercept=pooled.intercept,
            se=pooled.se,
            se_model=None,
            pooled={"q_bar": pooled.q_bar, "w_bar": pooled.w_bar, "b": pooled.b, "t": pooled.t, "df": pooled.df},
        )
    else:
        fit = fit_outcome(impute(dataset, method, rng if method.stochastic else None, draw_index=int(method.stochastic)))
        report.update(estimate=fit.beta1_hat, intercept=fit.beta0_hat, se=fit.se_beta1_model, se_model=fit.se_beta1_model, pooled=None)

    try:
        cc = fit_complete_case(dataset)
        report["complete_case"] = {"estimate": cc.beta1_hat, "se_model": cc.se_beta1_model, "n_used": cc.n_used}
    except CovImputeError:
        report["complete_case"] = None

    if bootstrap:
        boot = bootstrap_se(dataset, method, bootstrap, stream(seed, "analyze", "bootstrap"), threads=threads)
        report["bootstrap"] = {"b_count": boot.b_count, "skipped": boot.skipped, "se": boot.se}
    else:
        report["bootstrap"] = None
    return report
