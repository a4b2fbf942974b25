import math

import numpy as np
import pytest

import privmeter as pm


@pytest.fixture(scope="module")
def scenario():
    cohort = pm.synthesize_cohort(individuals=12, snps=150, seed=3)
    return pm.select_scenario(cohort, "comparison", snps=150, seed=3)


def test_metric_catalogue():
    names = pm.metric_names()
    assert len(names) == 24
    assert "entropy" in names and "max_entropy" in names
    assert pm.metric_direction("entropy") == "H"
    assert pm.metric_direction("mutual_information") == "L"


def test_per_snp_values_match_hand_computation():
    est = [0.2, 0.5, 0.3]
    h = -sum(p * math.log2(p) for p in est)
    assert pm.per_snp_metric("entropy", est, 1, 0.3) == pytest.approx(h, abs=1e-12)
    assert pm.per_snp_metric("relative_entropy", est, 2, 0.3) == pytest.approx(-math.log2(0.3), abs=1e-12)
    assert pm.per_snp_metric("expected_estimation_error", est, 0, 0.3) == pytest.approx(0.5 + 2 * 0.3)


def test_reference_estimate_is_hardy_weinberg():
    q = 0.2
    assert pm.reference_estimate(q) == pytest.approx([(1 - q) ** 2, 2 * q * (1 - q), q * q], abs=1e-9)


def test_scenario_shapes(scenario):
    assert scenario.truth.shape == (12, 150)
    assert scenario.truth.dtype == np.int8
    assert len(scenario.mafs) == 150


def test_estimates_on_simplex(scenario):
    level = pm.default_ladder("uniform")[3]
    index, est = pm.estimate_individual(scenario, level, 0, replication=1, seed=9)
    assert est.shape == (len(index), 3)
    assert np.allclose(est.sum(axis=1), 1.0)
    assert (est >= 1e-9).all()


def test_evaluate_ladder_is_deterministic(scenario):
    ladder = pm.default_ladder("normal")
    a = pm.evaluate_ladder(scenario, ladder, replications=2, seed=5, threads=1)
    b = pm.evaluate_ladder(scenario, ladder, replications=2, seed=5, threads=3)
    assert set(a) == set(pm.metric_names())
    for name in a:
        assert a[name].shape == (len(ladder), 2, 12)
        np.testing.assert_array_equal(a[name], b[name])


def test_welch_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    a = [1.0, 2.5, 3.1, 4.7, 2.2]
    b = [2.0, 3.9, 4.4, 5.8, 6.1, 3.3]
    t, p = pm.welch_t_test(a, b)
    ref = stats.ttest_ind(a, b, equal_var=False)
    assert t == pytest.approx(ref.statistic, rel=1e-9)
    assert p == pytest.approx(ref.pvalue, rel=1e-7)


def test_monotone_series_scores_full_strength():
    # Privacy drops as the adversary grows stronger, so a falling series is
    # ideal for a higher-is-private metric and a rising one for lower-is-private.
    falling = [[10.0 - i + 0.01 * k for k in range(10)] for i in range(4)]
    cell = pm.monotonicity_score(falling, "H")
    assert cell["m_normalized"] == pytest.approx(1.0)
    assert len(cell["pairs"]) == 6
    assert pm.monotonicity_score(falling, "L")["m_normalized"] == pytest.approx(-1.0)


def test_errors_are_typed():
    with pytest.raises(pm.UsageError):
        pm.AdversaryLevel.normal(1.5)
    with pytest.raises(pm.UsageError):
        pm.default_ladder("psychic")
    assert issubclass(pm.DataError, pm.PrivmeterError)


def test_strength_colors():
    assert pm.strength_color(0.0) == "#4CAF50"
    assert pm.strength_color(-1.0) == "#FFEB3B"
    assert pm.strength_color(1.0) == "#2196F3"
