"""Small dense least squares and moment helpers.

Matrices are plain 2-D float ``numpy`` arrays. Designs here have at most
three columns, so the normal equations are solved through a Cholesky
factor of ``W'W`` rather than a QR decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientData, NotPositiveDefinite, RankDeficient

# upper bound on the condition number of the column-equilibrated W'W
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class FittedLinearModel:
    """Result of an ordinary least squares fit.

    ``coef_cov`` is ``sigma2_hat * xtx_inv``; the unscaled inverse is kept
    because posterior draws rescale it by a sampled variance.
    """

    coefficients: np.ndarray
    sigma2_hat: float
    coef_cov: np.ndarray
    xtx_inv: np.ndarray
    r_squared: float
    df_residual: int
    residuals: np.ndarray

    @property
    def ssr(self) -> float:
        return self.sigma2_hat * self.df_residual


def as_matrix(values) -> np.ndarray:
    mat = np.asarray(values, dtype=float)
    if mat.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DimensionMismatch("matrix entries must be finite")
    return mat


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2.0


def cholesky(matrix) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == (A + A.T) / 2``.

    Raises ``NotPositiveDefinite`` when the symmetrized input is not
    positive definite.
    """
    mat = as_matrix(matrix)
    if mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"cholesky needs a square matrix, got {mat.shape}")
    try:
        lower = np.linalg.cholesky(symmetrize(mat))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if np.any(np.diag(lower) <= 0.0):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    return lower


def psd_factor(matrix) -> np.ndarray:
    """A factor ``L`` with ``L @ L.T == A`` for symmetric positive semidefinite ``A``.

    Uses Cholesky when it succeeds and falls back to a clipped eigen
    decomposition for singular (e.g. all-zero) matrices.
    """
    mat = symmetrize(as_matrix(matrix))
    if not np.any(mat):
        return np.zeros_like(mat)
    try:
        return cholesky(mat)
    except NotPositiveDefinite:
        pass
    eigval, eigvec = np.linalg.eigh(mat)
    scale = max(1.0, float(np.max(np.abs(eigval))))
    if eigval.min() < -1e-10 * scale:
        raise NotPositiveDefinite(f"matrix has negative eigenvalue {eigval.min():.3g}")
    return eigvec * np.sqrt(np.clip(eigval, 0.0, None))


def _solve_spd(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return np.linalg.solve(lower.T, np.linalg.solve(lower, rhs))


def fit_ols(design, response) -> FittedLinearModel:
    """Least squares fit of ``response`` on the columns of ``design``.

    Parameters
    ----------
    design : array_like, shape (n, p)
        Design matrix; include a column of ones for an intercept.
    response : array_like, shape (n,)

    Returns
    -------
    FittedLinearModel
        ``sigma2_hat = SSR / (n - p)`` and ``r_squared = 1 - SSR / TSS``
        (0 when the response is constant).
    """
    w = as_matrix(design)
    y = np.asarray(response, dtype=float)
    n, p = w.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"response has shape {y.shape}, design has {n} rows")
    if not np.all(np.isfinite(y)):
        raise DimensionMismatch("response entries must be finite")
    if n <= p:
        raise InsufficientData(f"need more rows than columns (n={n}, p={p})")

    xtx = w.T @ w
    norms = np.sqrt(np.diag(xtx))
    if np.any(norms == 0.0):
        raise RankDeficient("design has an all-zero column")
    eig = np.linalg.eigvalsh(xtx / np.outer(norms, norms))
    if eig[0] <= 0.0 or eig[-1] / eig[0] > MAX_CONDITION:
        raise RankDeficient("design columns are collinear")

    lower = cholesky(xtx)
    coefficients = _solve_spd(lower, w.T @ y)
    xtx_inv = symmetrize(_solve_spd(lower, np.eye(p)))

    residuals = y - w @ coefficients
    df = n - p
    ssr = float(residuals @ residuals)
    sigma2 = ssr / df
    centered = y - y.mean()
    tss = float(centered @ centered)
    r2 = 0.0 if tss == 0.0 else min(1.0, max(0.0, 1.0 - ssr / tss))
    return FittedLinearModel(
        coefficients=coefficients,
        sigma2_hat=sigma2,
        coef_cov=sigma2 * xtx_inv,
        xtx_inv=xtx_inv,
        r_squared=r2,
        df_residual=df,
        residuals=residuals,
    )


def predict(model: FittedLinearModel, design) -> np.ndarray:
    w = as_matrix(design)
    if w.shape[1] != model.coefficients.shape[0]:
        raise DimensionMismatch(
            f"design has {w.shape[1]} columns, model has {model.coefficients.shape[0]} coefficients"
        )
    return w @ model.coefficients


def sample_variance(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise InsufficientData("variance needs at least two values")
    d = v - v.mean()
    return float(d @ d) / (v.size - 1)


def sample_covariance(a, b) -> float:
    """Covariance with an ``n - 1`` denominator."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"lengths differ: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise InsufficientData("covariance needs at least two values")
    return float((a - a.mean()) @ (b - b.mean())) / (a.size - 1)
