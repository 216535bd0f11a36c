"""Outcome-model fits on completed data, Rubin pooling, and the full-pipeline bootstrap."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CovImputeError, InsufficientData, InsufficientImputations, RankDeficient
from .imputer import ImputationMethod, ImputedDataset, impute
from .numcore import sample_covariance, sample_variance
from .scenario import Dataset
from .stochastics import RngStream, draw_indices


@dataclass(frozen=True)
class OutcomeFit:
    beta0_hat: float
    beta1_hat: float
    se_beta1_model: float
    n_used: int
    source: str

    @property
    def var_beta1_model(self) -> float:
        return self.se_beta1_model**2


@dataclass(frozen=True)
class PooledEstimate:
    q_bar: float
    w_bar: float
    b: float
    t: float
    df: float
    m: int
    intercept: float

    @property
    def se(self) -> float:
        return math.sqrt(self.t)


@dataclass(frozen=True)
class BootstrapResult:
    replicates: np.ndarray
    se: float
    b_count: int
    skipped: int = 0


def fit_simple(x, y, source: str) -> OutcomeFit:
    """Regress ``y`` on ``(1, x)`` through sample moments.

    The slope variance is ``{var(y)/var(x) - cov(x,y)^2/var(x)^2} / (n - 2)``,
    which is what regression software reports when ``x`` is treated as fixed.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if n < 3:
        raise InsufficientData(f"outcome model needs at least 3 rows, got {n}")
    vx = sample_variance(x)
    if vx <= 1e-12 * max(1.0, float(np.mean(x * x))):
        raise RankDeficient("covariate is constant")
    vy = sample_variance(y)
    cxy = sample_covariance(x, y)
    slope = cxy / vx
    var_slope = max(0.0, (vy / vx - cxy**2 / vx**2) / (n - 2))
    return OutcomeFit(
        beta0_hat=float(y.mean() - slope * x.mean()),
        beta1_hat=slope,
        se_beta1_model=math.sqrt(var_slope),
        n_used=n,
        source=source,
    )


def fit_outcome(imputed: ImputedDataset) -> OutcomeFit:
    label = f"imputed({imputed.method.name},{imputed.draw_index})"
    return fit_simple(imputed.x_imp, imputed.base.y, label)


def fit_complete_case(dataset: Dataset) -> OutcomeFit:
    obs = dataset.observed
    if obs.sum() < 3:
        raise InsufficientData("complete-case fit needs at least 3 observed rows")
    return fit_simple(dataset.x_obs[obs], dataset.y[obs], "complete_case")


def fit_full(dataset: Dataset) -> OutcomeFit:
    """Fit on the never-masked covariate (only available for generated data)."""
    if dataset.x_full is None:
        raise InsufficientData("dataset carries no x_full column")
    return fit_simple(dataset.x_full, dataset.y, "full")


def pool_rubin(fits: Sequence[OutcomeFit]) -> PooledEstimate:
    """Combine slope estimates from ``m`` imputed datasets with Rubin's rules.

    Total variance is ``w_bar + (1 + 1/m) b``; degrees of freedom use the
    classical ``(m - 1) (1 + w_bar / ((1 + 1/m) b))^2`` form (infinite when
    ``b == 0``).
    """
    m = len(fits)
    if m < 2:
        raise InsufficientImputations(f"pooling needs at least 2 imputations, got {m}")
    q = np.array([f.beta1_hat for f in fits])
    w = np.array([f.var_beta1_model for f in fits])
    q_bar = float(q.mean())
    w_bar = float(w.mean())
    b = float(((q - q_bar) ** 2).sum() / (m - 1))
    inflated = (1.0 + 1.0 / m) * b
    t = w_bar + inflated
    df = math.inf if b == 0 else (m - 1) * (1.0 + w_bar / inflated) ** 2
    intercept = float(np.mean([f.beta0_hat for f in fits]))
    return PooledEstimate(q_bar=q_bar, w_bar=w_bar, b=b, t=t, df=df, m=m, intercept=intercept)


def _bootstrap_replicate(dataset: Dataset, method: ImputationMethod, rng: RngStream) -> float:
    resample = dataset.take(draw_indices(rng, dataset.n, dataset.n))
    imputed = impute(resample, method, rng if method.stochastic else None)
    return fit_outcome(imputed).beta1_hat


def bootstrap_se(
    dataset: Dataset,
    method: ImputationMethod,
    b_count: int,
    rng: RngStream,
    threads: int = 1,
) -> BootstrapResult:
    """Bootstrap the whole impute-then-fit pipeline.

    Replicate ``i`` resamples rows with ``rng.substream("bootstrap", i)``, so
    the replicate vector does not depend on ``threads``. Replicates whose
    resample cannot be imputed or fitted are dropped and counted in
    ``skipped``.
    """
    if b_count < 2:
        raise InsufficientData(f"bootstrap needs at least 2 replicates, got {b_count}")

    def run(i):
        try:
            return _bootstrap_replicate(dataset, method, rng.substream("bootstrap", i))
        except CovImputeError:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(b_count)))
    else:
        results = [run(i) for i in range(b_count)]

    replicates = np.array([r for r in results if r is not None])
    skipped = b_count - replicates.size
    if replicates.size < 2:
        raise InsufficientData(f"only {replicates.size} bootstrap replicates succeeded")
    return BootstrapResult(
        replicates=replicates,
        se=float(np.std(replicates, ddof=1)),
        b_count=int(replicates.size),
        skipped=skipped,
    )
