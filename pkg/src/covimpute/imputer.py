"""Single-covariate regression imputation: deterministic or posterior-predictive draws."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientData, InvalidMethod, MissingRng
from .numcore import FittedLinearModel, fit_ols
from .scenario import Dataset
from .stochastics import RngStream, draw_mvn, draw_normal, draw_scaled_inv_chisq


class Kind(enum.Enum):
    DETERMINISTIC = "det"
    STOCHASTIC = "stoc"


@dataclass(frozen=True)
class ImputationMethod:
    kind: Kind
    include_outcome: bool

    @property
    def name(self) -> str:
        return self.kind.value + ("-y" if self.include_outcome else "")

    @property
    def stochastic(self) -> bool:
        return self.kind is Kind.STOCHASTIC

    @classmethod
    def from_name(cls, name: str) -> "ImputationMethod":
        try:
            return _BY_NAME[name]
        except KeyError:
            raise InvalidMethod(f"unknown method {name!r}; expected one of {sorted(_BY_NAME)}") from None

    def __str__(self) -> str:
        return self.name


DET = ImputationMethod(Kind.DETERMINISTIC, False)
DET_Y = ImputationMethod(Kind.DETERMINISTIC, True)
STOC = ImputationMethod(Kind.STOCHASTIC, False)
STOC_Y = ImputationMethod(Kind.STOCHASTIC, True)
_BY_NAME = {m.name: m for m in (DET, DET_Y, STOC, STOC_Y)}
ALL_METHODS = (DET, DET_Y, STOC, STOC_Y)


@dataclass
class ImputedDataset:
    base: Dataset
    x_imp: np.ndarray
    method: ImputationMethod
    draw_index: int
    imputation_fit: FittedLinearModel

    @property
    def y(self) -> np.ndarray:
        return self.base.y


def imputation_design(dataset: Dataset, include_outcome: bool) -> np.ndarray:
    cols = [np.ones(dataset.n), dataset.z.astype(float)]
    if include_outcome:
        cols.append(dataset.y)
    return np.column_stack(cols)


def impute(
    dataset: Dataset,
    method: ImputationMethod,
    rng: Optional[RngStream] = None,
    draw_index: int = 0,
) -> ImputedDataset:
    """Fill the missing covariate values of ``dataset``.

    The imputation model regresses observed ``x`` on ``(1, z)`` or
    ``(1, z, y)``. Deterministic imputation plugs in the fitted values.
    Stochastic imputation draws, in order: a residual variance from a
    scaled inverse chi-square (``df = n_obs - p``, scale = residual mean
    square), coefficients from ``N(coef_hat, sigma2_draw * (W'W)^-1)``, and
    one independent normal residual per missing row.

    Observed entries are copied unchanged.
    """
    if method.stochastic and rng is None:
        raise MissingRng("stochastic imputation needs an RngStream")
    design = imputation_design(dataset, method.include_outcome)
    p = design.shape[1]
    observed = dataset.observed
    n_obs = int(observed.sum())
    if n_obs < p + 2:
        raise InsufficientData(f"{n_obs} observed rows; need at least {p + 2}")

    fit = fit_ols(design[observed], dataset.x_obs[observed])
    x_imp = dataset.x_obs.copy()
    missing = ~observed
    n_mis = int(missing.sum())

    if method.stochastic:
        df = fit.df_residual
        sigma2 = float(draw_scaled_inv_chisq(rng, df, fit.ssr / df))
        coef = draw_mvn(rng, fit.coefficients, sigma2 * fit.xtx_inv)
        noise = draw_normal(rng, 0.0, float(np.sqrt(sigma2)), n_mis)
        x_imp[missing] = design[missing] @ coef + noise
    elif n_mis:
        x_imp[missing] = design[missing] @ fit.coefficients

    return ImputedDataset(
        base=dataset, x_imp=x_imp, method=method, draw_index=draw_index, imputation_fit=fit
    )


def impute_multiple(dataset: Dataset, method: ImputationMethod, m: int, rng: RngStream) -> list[ImputedDataset]:
    """``m`` independent stochastic imputations; draw ``i`` uses ``rng.substream(i)``."""
    if not method.stochastic:
        raise InvalidMethod("multiple deterministic imputations would be identical")
    if m < 2:
        raise InvalidMethod(f"multiple imputation needs m >= 2, got {m}")
    return [impute(dataset, method, rng.substream(i), draw_index=i) for i in range(1, m + 1)]
