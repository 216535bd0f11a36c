"""Data generation for the single-missing-covariate world and its closed-form moments.

The generative model::

    Z ~ Bernoulli(p_z)
    X = alpha0 + alpha1 * Z + N(0, sigma_x^2)
    Y = beta0 + beta1 * X + N(0, sigma_y^2)
    Pr(R_X = 1 | Z) = p_miss_0 * (1 - Z) + p_miss_1 * Z

``theory_quantities`` evaluates, in closed form, the population moments of
the covariate completed by each of the four imputation strategies, with the
fitted imputation coefficients replaced by their expectations.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateScenario, InsufficientData, InvalidConfig, InvalidParameter
from .stochastics import RngStream, draw_bernoulli, draw_normal

METHODS = ("det", "det-y", "stoc", "stoc-y")

PR_TOL = 1e-9
VAR_TOL = 1e-12


@dataclass(frozen=True)
class ScenarioParams:
    p_z: float = 0.5
    alpha0: float = 0.0
    alpha1: float = 1.0
    sigma_x: float = 1.0
    beta0: float = 0.0
    beta1: float = 2.0
    sigma_y: float = 1.0
    p_miss_0: float = 0.25
    p_miss_1: float = 0.50

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidParameter(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameter(f"{f.name} must be finite")
        for name in ("p_z", "p_miss_0", "p_miss_1"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidParameter(f"{name} must lie in [0, 1]")
        if self.sigma_x < 0 or self.sigma_y < 0:
            raise InvalidParameter("sigma_x and sigma_y must be non-negative")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(f"unknown scenario fields: {', '.join(unknown)}")
        return cls(**data)

    def with_(self, **changes) -> "ScenarioParams":
        return dataclasses.replace(self, **changes)


@dataclass
class Dataset:
    """Column-oriented observations; ``x_obs`` is NaN exactly where ``r_x == 1``."""

    z: np.ndarray
    y: np.ndarray
    x_obs: np.ndarray
    r_x: np.ndarray
    x_full: Optional[np.ndarray] = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.int8)
        self.y = np.asarray(self.y, dtype=float)
        self.x_obs = np.asarray(self.x_obs, dtype=float)
        self.r_x = np.asarray(self.r_x, dtype=np.int8)
        n = self.z.shape[0]
        cols = [self.y, self.x_obs, self.r_x]
        if self.x_full is not None:
            self.x_full = np.asarray(self.x_full, dtype=float)
            cols.append(self.x_full)
        if self.z.ndim != 1 or any(c.shape != (n,) for c in cols):
            raise InvalidParameter("dataset columns must be 1-D with equal lengths")
        if not np.all((self.z == 0) | (self.z == 1)) or not np.all((self.r_x == 0) | (self.r_x == 1)):
            raise InvalidParameter("z and r_x must be binary")
        if not np.all(np.isfinite(self.y)):
            raise InvalidParameter("y must be finite")
        observed = self.r_x == 0
        if not np.all(np.isfinite(self.x_obs[observed])) or not np.all(np.isnan(self.x_obs[~observed])):
            raise InvalidParameter("x_obs must be finite where observed and NaN where missing")
        if self.x_full is not None and not np.array_equal(self.x_full[observed], self.x_obs[observed]):
            raise InvalidParameter("x_full disagrees with x_obs on observed rows")

    @property
    def n(self) -> int:
        return int(self.z.shape[0])

    @property
    def observed(self) -> np.ndarray:
        return self.r_x == 0

    @property
    def n_missing(self) -> int:
        return int(self.r_x.sum())

    @property
    def n_obs(self) -> int:
        return self.n - self.n_missing

    def take(self, indices) -> "Dataset":
        """Rows at ``indices`` (repeats allowed), e.g. a bootstrap resample."""
        return Dataset(
            z=self.z[indices],
            y=self.y[indices],
            x_obs=self.x_obs[indices],
            r_x=self.r_x[indices],
            x_full=None if self.x_full is None else self.x_full[indices],
        )

    @classmethod
    def from_complete(cls, z, x, y) -> "Dataset":
        x = np.asarray(x, dtype=float)
        return cls(z=z, y=y, x_obs=x.copy(), r_x=np.zeros(x.shape[0], dtype=np.int8), x_full=x)


def generate(params: ScenarioParams, n: int, rng: RngStream) -> Dataset:
    """Draw ``n`` rows; draw order is z, eps_x, eps_y, then missingness uniforms."""
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n}")
    n = int(n)
    z = draw_bernoulli(rng, params.p_z, n)
    x = params.alpha0 + params.alpha1 * z + draw_normal(rng, 0.0, params.sigma_x, n)
    y = params.beta0 + params.beta1 * x + draw_normal(rng, 0.0, params.sigma_y, n)
    p_miss = np.where(z == 1, params.p_miss_1, params.p_miss_0)
    r_x = (rng.generator.random(n) < p_miss).astype(np.int8)
    x_obs = np.where(r_x == 1, np.nan, x)
    return Dataset(z=z, y=y, x_obs=x_obs, r_x=r_x, x_full=x)


@dataclass(frozen=True)
class CoefficientVariances:
    full_cohort: float
    model_based_det: float
    complete_case: float


@dataclass(frozen=True)
class TheoreticalQuantities:
    p_z: float
    pr_r1: float
    pr_z1_given_r0: float
    pr_z1_given_r1: float
    e_x: float
    e_x_given_r0: float
    e_x_given_r1: float
    var_x: float
    var_x_given_r0: float
    var_x_given_r1: float
    var_z_given_r0: float
    var_z_given_r1: float
    var_xhat_given_r1: float
    cov_xhat_y_given_r1: float
    cov_xy: float
    cov_xy_given_r0: float
    var_y: float
    var_y_given_r0: float
    e_y: float
    e_y_given_r0: float
    e_y_given_r1: float
    r2_imp: float
    omega: float
    var_x_imp_det: float
    cov_x_imp_det_y: float
    gamma: tuple
    var_xhat_det_y_given_r1: float
    cov_xhat_det_y_y_given_r1: float
    var_x_imp_det_y: float
    cov_x_imp_det_y_y: float
    imputed_var: dict = field(default_factory=dict)
    imputed_cov: dict = field(default_factory=dict)
    expected_beta: dict = field(default_factory=dict)
    # expected variances of the slope, as multiples of 1/(n-2) or 1/(n_obs-2)
    var_coef_full: float = 0.0
    var_coef_model_det: float = 0.0
    var_coef_complete_case: float = 0.0

    @property
    def pr_r0(self) -> float:
        return 1.0 - self.pr_r1

    def check_invariants(self, tol: float = 1e-12) -> list[str]:
        """Names of violated internal consistency checks (empty when consistent)."""
        failures = []

        def close(a, b):
            return abs(a - b) <= tol * max(1.0, abs(a), abs(b))

        if not close(self.var_x_imp_det, self.omega * self.var_x):
            failures.append("var_x_imp_det == omega * var_x")
        if not close(self.cov_x_imp_det_y, self.omega * self.cov_xy):
            failures.append("cov_x_imp_det_y == omega * cov_xy")
        total = self.pr_z1_given_r0 * self.pr_r0 + self.pr_z1_given_r1 * self.pr_r1
        if not close(total, self.p_z):
            failures.append("law of total probability for Z")
        beta1 = self.cov_xy / self.var_x
        for name in ("det", "stoc-y"):
            if not close(self.expected_beta[name], beta1):
                failures.append(f"expected_beta[{name}] == beta1")
        return failures


def _completed_variance(var_obs, var_imp, mean_obs, mean_imp, pr0, pr1):
    """Law of total variance over R_X: within-group average plus between-group spread."""
    return var_obs * pr0 + var_imp * pr1 + (mean_obs - mean_imp) ** 2 * pr0 * pr1


def _completed_covariance(cov_obs, cov_imp, ey_obs, mean_obs, ey_imp, mean_imp, pr0, pr1):
    """Law of total covariance over R_X: average conditional covariance plus covariance of means."""
    return cov_obs * pr0 + cov_imp * pr1 + (ey_obs - ey_imp) * (mean_obs - mean_imp) * pr0 * pr1


def theory_quantities(params: ScenarioParams) -> TheoreticalQuantities:
    """Closed-form moments of the completed covariate for every imputation strategy.

    Raises ``DegenerateScenario`` when every row is missing, when X has no
    variance, or when Z does not vary among observed rows (the imputation
    regression is then not identifiable). A scenario with no missingness is
    allowed; conditional moments given R_X = 1 then fall back to marginals.
    """
    a0, a1, sx = params.alpha0, params.alpha1, params.sigma_x
    b0, b1, sy = params.beta0, params.beta1, params.sigma_y
    pz = params.p_z

    pr1 = params.p_miss_0 * (1 - pz) + params.p_miss_1 * pz
    pr0 = 1.0 - pr1
    if pr0 < PR_TOL:
        raise DegenerateScenario(f"Pr(R_X=1) = {pr1} leaves no observed rows")
    if pr1 < PR_TOL:
        pr1, pr0 = 0.0, 1.0

    var_z = pz * (1 - pz)
    var_x = sx**2 + a1**2 * var_z
    if var_x < VAR_TOL:
        raise DegenerateScenario("X has zero variance")

    # Bayes rule for the composition of the observed and missing groups
    pz1_r0 = (1 - params.p_miss_1) * pz / pr0
    pz1_r1 = params.p_miss_1 * pz / pr1 if pr1 > 0 else pz
    var_z_r0 = pz1_r0 * (1 - pz1_r0)
    var_z_r1 = pz1_r1 * (1 - pz1_r1)
    if var_z_r0 < VAR_TOL:
        raise DegenerateScenario("Z is constant among observed rows")

    e_x = a0 + a1 * pz
    e_x_r0 = a0 + a1 * pz1_r0
    e_x_r1 = a0 + a1 * pz1_r1
    var_x_r0 = sx**2 + a1**2 * var_z_r0
    var_x_r1 = sx**2 + a1**2 * var_z_r1

    cov_xy = b1 * var_x
    var_y = b1**2 * var_x + sy**2
    e_y = b0 + b1 * e_x
    e_y_r0 = b0 + b1 * e_x_r0
    e_y_r1 = b0 + b1 * e_x_r1
    cov_xy_r0 = b1 * var_x_r0
    var_y_r0 = b1**2 * var_x_r0 + sy**2
    var_y_r1 = b1**2 * var_x_r1 + sy**2
    cov_zy_r1 = b1 * a1 * var_z_r1

    # imputation model X ~ Z among observed rows, at its expected coefficients
    xhat_mean_r1 = a0 + a1 * pz1_r1
    var_xhat_r1 = a1**2 * var_z_r1
    cov_xhat_y_r1 = a1 * cov_zy_r1
    r2 = a1**2 * var_z_r0 / var_x_r0
    delta0 = var_x_r0 / var_x
    delta1 = var_x_r1 / var_x
    omega = 1.0 + pr1 * (r2 * delta0 * var_z_r1 / var_z_r0 - delta1)

    # imputation model X ~ Z + Y: E(X | Z, Y) is linear within each Z stratum
    denom = b1**2 * sx**2 + sy**2
    k = b1 * sx**2 / denom if denom > 0 else 0.0
    g0 = a0 * (1 - k * b1) - k * b0
    g1 = a1 * (1 - k * b1)
    g2 = k
    resid_var_y = sx**2 * (1 - k * b1)
    xhat_y_mean_r1 = g0 + g1 * pz1_r1 + g2 * e_y_r1
    var_xhat_y_r1 = g1**2 * var_z_r1 + g2**2 * var_y_r1 + 2 * g1 * g2 * cov_zy_r1
    cov_xhat_y_y_r1 = g1 * cov_zy_r1 + g2 * var_y_r1

    per_method = {
        "det": (var_xhat_r1, cov_xhat_y_r1, xhat_mean_r1),
        "det-y": (var_xhat_y_r1, cov_xhat_y_y_r1, xhat_y_mean_r1),
        "stoc": (var_xhat_r1 + sx**2, cov_xhat_y_r1, xhat_mean_r1),
        "stoc-y": (var_xhat_y_r1 + resid_var_y, cov_xhat_y_y_r1, xhat_y_mean_r1),
    }
    imputed_var, imputed_cov, expected_beta = {}, {}, {}
    for name, (v_imp, c_imp, m_imp) in per_method.items():
        v = _completed_variance(var_x_r0, v_imp, e_x_r0, m_imp, pr0, pr1)
        c = _completed_covariance(cov_xy_r0, c_imp, e_y_r0, e_x_r0, e_y_r1, m_imp, pr0, pr1)
        imputed_var[name] = v
        imputed_cov[name] = c
        expected_beta[name] = c / v

    var_coef_full = var_y / var_x - cov_xy**2 / var_x**2
    var_coef_model_det = var_y / (var_x * omega) - cov_xy**2 / var_x**2
    var_coef_cc = var_y_r0 / var_x_r0 - cov_xy_r0**2 / var_x_r0**2

    return TheoreticalQuantities(
        p_z=pz,
        pr_r1=pr1,
        pr_z1_given_r0=pz1_r0,
        pr_z1_given_r1=pz1_r1,
        e_x=e_x,
        e_x_given_r0=e_x_r0,
        e_x_given_r1=e_x_r1,
        var_x=var_x,
        var_x_given_r0=var_x_r0,
        var_x_given_r1=var_x_r1,
        var_z_given_r0=var_z_r0,
        var_z_given_r1=var_z_r1,
        var_xhat_given_r1=var_xhat_r1,
        cov_xhat_y_given_r1=cov_xhat_y_r1,
        cov_xy=cov_xy,
        cov_xy_given_r0=cov_xy_r0,
        var_y=var_y,
        var_y_given_r0=var_y_r0,
        e_y=e_y,
        e_y_given_r0=e_y_r0,
        e_y_given_r1=e_y_r1,
        r2_imp=r2,
        omega=omega,
        var_x_imp_det=imputed_var["det"],
        cov_x_imp_det_y=imputed_cov["det"],
        gamma=(g0, g1, g2),
        var_xhat_det_y_given_r1=var_xhat_y_r1,
        cov_xhat_det_y_y_given_r1=cov_xhat_y_y_r1,
        var_x_imp_det_y=imputed_var["det-y"],
        cov_x_imp_det_y_y=imputed_cov["det-y"],
        imputed_var=imputed_var,
        imputed_cov=imputed_cov,
        expected_beta=expected_beta,
        var_coef_full=var_coef_full,
        var_coef_model_det=var_coef_model_det,
        var_coef_complete_case=var_coef_cc,
    )


def expected_coefficient_variances(params: ScenarioParams, n: int) -> CoefficientVariances:
    """Expected model-based slope variances at sample size ``n``.

    The complete-case value divides by the expected number of observed rows
    minus two.
    """
    tq = theory_quantities(params)
    n_obs = n * tq.pr_r0
    if n <= 2 or n_obs <= 2:
        raise InsufficientData(f"n={n} leaves too few rows for a two-parameter fit")
    return CoefficientVariances(
        full_cohort=tq.var_coef_full / (n - 2),
        model_based_det=tq.var_coef_model_det / (n - 2),
        complete_case=tq.var_coef_complete_case / (n_obs - 2),
    )
