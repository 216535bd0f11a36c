import csv
import io

import numpy as np
import pytest

from covimpute import DET, ScenarioParams, generate
from covimpute.errors import InsufficientData, InvalidConfig
from covimpute.experiments import GRID_COLUMNS, analyze, grid_to_csv, run_grid, run_sampling
from covimpute.stochastics import RngStream


def test_grid_records_are_consistent():
    records = run_grid(ScenarioParams(), [0.25, 0.65], 2000, seed=3)
    assert len(records) == 8
    for rec in records:
        assert rec.beta1 == pytest.approx(rec.cov_ximp_y / rec.var_ximp, rel=1e-12)
        assert rec.theory_beta1 == pytest.approx(rec.theory_cov / rec.theory_var, rel=1e-12)


def test_grid_csv_columns():
    text = grid_to_csv(run_grid(ScenarioParams(), [0.45], 500, seed=1))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0]) == GRID_COLUMNS
    assert [r["method"] for r in rows] == ["det", "det-y", "stoc", "stoc-y"]


def test_grid_thread_independent():
    a = grid_to_csv(run_grid(ScenarioParams(), [0.05, 0.5, 0.85], 3000, seed=9))
    b = grid_to_csv(run_grid(ScenarioParams(), [0.05, 0.5, 0.85], 3000, seed=9, threads=3))
    assert a == b


def test_grid_cell_p050_det(defaults):
    (det,) = [r for r in run_grid(defaults, [0.5], 10**6, seed=1) if r.method == "det"]
    assert det.var_ximp == pytest.approx(0.875, rel=0.02)
    assert det.cov_ximp_y == pytest.approx(1.75, rel=0.02)
    assert det.beta1 == pytest.approx(2.0, rel=0.02)


def test_grid_mcar_stochastic(defaults):
    (stoc,) = [r for r in run_grid(defaults, [0.25], 10**6, seed=2) if r.method == "stoc"]
    assert abs(stoc.beta1 - 1.6) < 0.02


def test_grid_extreme_matches_theory(defaults):
    (stoc,) = [r for r in run_grid(defaults, [0.85], 10**6, seed=4) if r.method == "stoc"]
    assert stoc.beta1 == pytest.approx(stoc.theory_beta1, rel=0.02)


def test_sampling_summary_shape():
    res = run_sampling(ScenarioParams(), DET, 60, 200, seed=1)
    assert res["replications"] == 200 and res["skipped"] >= 0
    for block in ("imputed", "full_cohort", "complete_case"):
        assert set(res[block]) == {"mean_beta1", "empirical_var_beta1", "mean_model_var"}
    assert res["theory"]["expected_beta1"] == 2.0


def test_sampling_thread_independent():
    a = run_sampling(ScenarioParams(), DET, 50, 600, seed=5)
    b = run_sampling(ScenarioParams(), DET, 50, 600, seed=5, threads=4)
    assert a == b


def test_sampling_tiny_n_counts_skips():
    res = run_sampling(ScenarioParams(), DET, 8, 300, seed=1)
    assert res["skipped"] > 0


def test_sampling_validation():
    with pytest.raises(InvalidConfig):
        run_sampling(ScenarioParams(), DET, 100, 50, seed=1)
    with pytest.raises(InsufficientData):
        run_sampling(ScenarioParams(), DET, 2, 100, seed=1)


def test_analyze_rejects_deterministic_pooling():
    data = generate(ScenarioParams(), 100, RngStream(1))
    with pytest.raises(InvalidConfig):
        analyze(data, DET, seed=1, m=3)
