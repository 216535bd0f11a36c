import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from covimpute import ScenarioParams, expected_coefficient_variances, generate, theory_quantities
from covimpute.errors import DegenerateScenario, InsufficientData, InvalidConfig, InvalidParameter
from covimpute.imputer import DET, impute
from covimpute.numcore import sample_covariance, sample_variance
from covimpute.scenario import Dataset
from covimpute.stochastics import RngStream

from oracles import mixture_moments

METHODS = ("det", "det-y", "stoc", "stoc-y")


def scenarios(min_sigma=0.0, miss_hi=1.0, min_sigma_y=None):
    prob = st.floats(0.05, 0.95)
    coef = st.floats(-3, 3)
    sig = st.floats(min_sigma, 3)
    sig_y = sig if min_sigma_y is None else st.floats(min_sigma_y, 3)
    return st.builds(
        ScenarioParams,
        p_z=prob, alpha0=coef, alpha1=coef, sigma_x=sig,
        beta0=coef, beta1=coef, sigma_y=sig_y,
        p_miss_0=st.floats(0.0, miss_hi), p_miss_1=st.floats(0.0, miss_hi),
    )


# ---- generation


def test_noiseless_generation():
    params = ScenarioParams(sigma_x=0, sigma_y=0)
    data = generate(params, 500, RngStream(1))
    np.testing.assert_array_equal(data.x_full, data.z)
    np.testing.assert_array_equal(data.y, 2 * data.z)


def test_generated_moments(big_data):
    assert abs(big_data.x_full.mean() - 0.5) < 0.005
    assert abs(sample_variance(big_data.x_full) - 1.25) < 0.01
    assert abs(big_data.n_missing / big_data.n - 0.375) < 0.002


def test_masking_consistent(big_data):
    obs = big_data.observed
    assert np.array_equal(big_data.x_obs[obs], big_data.x_full[obs])
    assert np.isnan(big_data.x_obs[~obs]).all()


def test_generate_rejects_bad_n():
    with pytest.raises(InvalidParameter):
        generate(ScenarioParams(), 0, RngStream(1))


@pytest.mark.parametrize("field, value", [("p_z", 1.5), ("sigma_x", -1.0), ("p_miss_1", math.nan), ("beta1", "2")])
def test_params_validation(field, value):
    with pytest.raises(InvalidParameter):
        ScenarioParams(**{field: value})


def test_params_dict_round_trip():
    params = ScenarioParams(p_miss_1=0.85)
    assert ScenarioParams.from_dict(params.to_dict()) == params
    with pytest.raises(InvalidConfig):
        ScenarioParams.from_dict({"p_z": 0.5, "gamma": 1})


def test_dataset_rejects_inconsistent_mask():
    with pytest.raises(InvalidParameter):
        Dataset(z=[0, 1], y=[0.0, 1.0], x_obs=[np.nan, 1.0], r_x=[0, 0])


# ---- theory oracle


def test_default_values(defaults):
    tq = theory_quantities(defaults)
    assert tq.omega == pytest.approx(0.7, abs=1e-12)
    assert tq.var_x_imp_det == pytest.approx(0.875, abs=1e-12)
    assert tq.cov_x_imp_det_y == pytest.approx(1.75, abs=1e-12)
    assert tq.var_x_given_r0 == pytest.approx(1.24, abs=1e-12)
    assert tq.var_xhat_given_r1 == pytest.approx(2 / 9, abs=1e-12)
    assert tq.e_x_given_r0 == pytest.approx(0.4, abs=1e-12)
    assert tq.e_x_given_r1 == pytest.approx(2 / 3, abs=1e-12)
    assert tq.pr_r1 == pytest.approx(0.375)
    assert tq.var_x_imp_det_y == pytest.approx(1.175, abs=1e-12)
    assert tq.cov_x_imp_det_y_y == pytest.approx(2.5, abs=1e-12)
    np.testing.assert_allclose(tq.gamma, (0.0, 0.2, 0.4), atol=1e-12)


def test_expected_betas(defaults):
    beta = theory_quantities(defaults).expected_beta
    assert beta["det"] == 2.0
    assert beta["stoc"] == pytest.approx(1.4, abs=1e-12)
    assert beta["det-y"] == pytest.approx(2.5 / 1.175, abs=1e-12)
    assert beta["stoc-y"] == pytest.approx(2.0, abs=1e-12)


def test_mcar_variant(defaults):
    tq = theory_quantities(defaults.with_(p_miss_1=0.25))
    assert tq.omega == pytest.approx(0.8, abs=1e-12)
    assert tq.expected_beta["stoc"] == pytest.approx(1.6, abs=1e-12)
    assert tq.e_x_given_r0 == pytest.approx(tq.e_x_given_r1)


def test_no_missingness(defaults):
    tq = theory_quantities(defaults.with_(p_miss_0=0.0, p_miss_1=0.0))
    assert tq.omega == 1.0
    assert tq.var_x_imp_det == pytest.approx(tq.var_x)
    for name in METHODS:
        assert tq.expected_beta[name] == pytest.approx(2.0, abs=1e-12)


def test_noise_free_outcome_recovers_x(defaults):
    tq = theory_quantities(defaults.with_(sigma_y=0.0, beta1=1e-3))
    assert tq.gamma[2] == pytest.approx(1e3)
    assert tq.imputed_var["det-y"] == pytest.approx(tq.var_x, rel=1e-9)
    assert tq.expected_beta["det-y"] == pytest.approx(1e-3, rel=1e-9)


@pytest.mark.parametrize(
    "changes",
    [
        dict(p_miss_0=1.0, p_miss_1=1.0),
        dict(sigma_x=0.0, alpha1=0.0),
        dict(p_miss_1=1.0),  # observed rows all have z = 0
    ],
)
def test_degenerate(defaults, changes):
    with pytest.raises(DegenerateScenario):
        theory_quantities(defaults.with_(**changes))


def test_expected_variances(defaults):
    for n in (102, 1000, 12345):
        ev = expected_coefficient_variances(defaults, n)
        assert ev.full_cohort * (n - 2) == pytest.approx(0.8, rel=1e-5)
        assert ev.model_based_det * (n - 2) == pytest.approx(2.857143, abs=1e-6)
        assert ev.complete_case * (n * 0.625 - 2) == pytest.approx(0.806452, rel=1e-5)
    ev = expected_coefficient_variances(defaults, 102)
    assert ev.full_cohort == pytest.approx(0.008)
    assert ev.model_based_det == pytest.approx(0.029, abs=5e-4)
    assert ev.complete_case == pytest.approx(0.013, abs=5e-4)


def test_expected_variances_without_missingness(defaults):
    ev = expected_coefficient_variances(defaults.with_(p_miss_0=0.0, p_miss_1=0.0), 200)
    assert ev.full_cohort == pytest.approx(ev.model_based_det) == pytest.approx(ev.complete_case)


def test_expected_variances_need_rows(defaults):
    with pytest.raises(InsufficientData):
        expected_coefficient_variances(defaults, 2)
    with pytest.raises(InsufficientData):
        expected_coefficient_variances(defaults, 3)


# the enumeration oracle solves its regression numerically, so keep y noisy
@settings(max_examples=300, deadline=None)
@given(params=scenarios(min_sigma_y=0.05))
def test_closed_forms_match_cell_enumeration(params):
    try:
        tq = theory_quantities(params)
    except DegenerateScenario:
        assume(False)
    assume(tq.pr_r1 > 1e-6 or params.p_miss_0 == params.p_miss_1 == 0)
    for name in METHODS:
        var, cov = mixture_moments(params, name)
        scale = max(1.0, abs(var), abs(cov))
        assert tq.imputed_var[name] == pytest.approx(var, abs=1e-9 * scale)
        assert tq.imputed_cov[name] == pytest.approx(cov, abs=1e-9 * scale)


@settings(max_examples=300, deadline=None)
@given(params=scenarios())
def test_theory_invariants_hold(params):
    try:
        tq = theory_quantities(params)
    except DegenerateScenario:
        assume(False)
    assert tq.check_invariants(tol=1e-10) == []
    assert tq.pr_z1_given_r0 * tq.pr_r0 + tq.pr_z1_given_r1 * tq.pr_r1 == pytest.approx(params.p_z, abs=1e-12)
    assert tq.var_x_imp_det / tq.var_x == pytest.approx(tq.omega, abs=1e-10)
    if abs(tq.cov_xy) > 1e-6:
        assert tq.cov_x_imp_det_y / tq.cov_xy == pytest.approx(tq.omega, abs=1e-10)
    assert tq.expected_beta["det"] == params.beta1 or abs(tq.expected_beta["det"] - params.beta1) < 1e-10


@pytest.mark.slow
@settings(max_examples=6, deadline=None)
@given(params=scenarios(min_sigma=0.3, miss_hi=0.8), seed=st.integers(0, 2**32))
def test_empirical_det_moments_match_theory(params, seed):
    """20 independent datasets of 5e4 rows (10**6 in total); the mean of the
    per-dataset statistics must sit within 5 standard errors of theory."""
    try:
        tq = theory_quantities(params)
    except DegenerateScenario:
        assume(False)
    assume(tq.var_z_given_r0 > 0.01 and tq.pr_r1 > 0.01)
    root = RngStream(seed)
    var, cov = [], []
    for i in range(20):
        data = generate(params, 50_000, root.substream(i))
        x_imp = impute(data, DET).x_imp
        var.append(sample_variance(x_imp))
        cov.append(sample_covariance(x_imp, data.y))
    for values, target in ((var, tq.var_x_imp_det), (cov, tq.cov_x_imp_det_y)):
        values = np.array(values)
        se = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean() - target) <= 5 * se + 1e-4 * max(1.0, abs(target))
