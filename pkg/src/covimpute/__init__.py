"""Covariate imputation with and without the outcome: imputers, inference and a closed-form moment oracle."""
from .errors import CovImputeError
from .imputer import ALL_METHODS, DET, DET_Y, STOC, STOC_Y, ImputationMethod, impute, impute_multiple
from .inference import bootstrap_se, fit_complete_case, fit_full, fit_outcome, pool_rubin
from .numcore import cholesky, fit_ols, predict, sample_covariance, sample_variance
from .scenario import Dataset, ScenarioParams, expected_coefficient_variances, generate, theory_quantities
from .stochastics import RngStream

__version__ = "0.1.0"
