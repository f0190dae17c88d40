import json
import math

import numpy as np
import pytest
from scipy import stats as sps

from radonlevy import stats
from radonlevy.cylindrical import CallableJumps, CoordinateLevyModel, TimeGrid, simulate_bundle
from radonlevy.hilbert import Space, diagonal_operator, random_operator
from radonlevy.radonify import VectorPath, radonify_ensemble, radonify_series
from radonlevy.stats import FiniteDimensionalProjection, TestReport, empirical_cf, ks_two_sample

WIENER = CoordinateLevyModel.wiener()


def binomial_band(alpha, reps):
    sigma = math.sqrt(alpha * (1 - alpha) / reps)
    return alpha - 3 * sigma, alpha + 3 * sigma


@pytest.fixture(scope="module")
def wiener_paths():
    S = diagonal_operator(2.0 ** -np.arange(6), 8)
    return S, radonify_ensemble(WIENER, S, TimeGrid.uniform(1.0, 16), 2000, 41)


def proj_of(S, *idx):
    return FiniteDimensionalProjection([S.codomain.basis(i) for i in idx])


# -- empirical cf ------------------------------------------------------------


def test_empirical_cf_examples():
    x = np.random.default_rng(0).standard_normal(100_000)
    assert empirical_cf(x, 0.0) == 1.0 + 0.0j
    np.testing.assert_array_equal(empirical_cf(np.zeros(7), [-2.0, 0.5, 9.0]), np.ones(3))
    assert abs(empirical_cf(x, 1.0) - math.exp(-0.5)) < 3 / math.sqrt(x.size)
    assert np.all(np.abs(empirical_cf(x, np.linspace(-5, 5, 11))) <= 1 + 1e-12)
    with pytest.raises(ValueError):
        empirical_cf([], 1.0)


# -- KS ------------------------------------------------------------------------


def test_ks_identical_samples():
    a = np.random.default_rng(1).normal(size=50)
    r = ks_two_sample(a, a.copy())
    assert r.statistic == 0.0 and r.p_value == 1.0 and r.passed


def test_ks_statistic_matches_scipy():
    rng = np.random.default_rng(2)
    for na, nb in [(30, 50), (200, 200), (1000, 17)]:
        a, b = rng.normal(size=na), rng.normal(0.2, 1.0, size=nb)
        assert ks_two_sample(a, b).statistic == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


def test_ks_null_calibration():
    rng = np.random.default_rng(3)
    reps = 200
    rejections = sum(not ks_two_sample(rng.normal(size=500), rng.normal(size=400), alpha=0.05).passed for _ in range(reps))
    lo, hi = binomial_band(0.05, reps)
    assert lo <= rejections / reps <= hi


def test_ks_power():
    rng = np.random.default_rng(4)
    r = ks_two_sample(rng.normal(size=10_000), rng.normal(1.0, 1.0, size=10_000))
    assert r.p_value < 1e-6 and not r.passed


def test_ks_rejects_empty():
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


# -- stationarity --------------------------------------------------------------


def test_stationarity_same_window(wiener_paths):
    S, paths = wiener_paths
    r = stats.test_stationary_increments(paths, 0.25, 0.25, 0.25, proj_of(S, 0, 1))
    assert r.statistic == 0.0 and r.passed


def test_stationarity_passes_on_wiener(wiener_paths):
    S, paths = wiener_paths
    r = stats.test_stationary_increments(paths, 0.0, 0.5, 0.25, proj_of(S, 0, 1, 2), alpha=0.01)
    assert r.passed and len(r.details["directional_p"]) == 3


def test_stationarity_detects_time_scaling():
    # deterministic time change Y'_t = (1 + 3t) Y_t breaks stationarity
    S = diagonal_operator([1.0, 0.5], 2)
    grid = TimeGrid.uniform(1.0, 4)
    scale = 1.0 + 3.0 * grid.times
    paths = [
        VectorPath(Y.grid, Y.values * scale[:, None], Y.truncation_n, Y.space)
        for Y in radonify_ensemble(WIENER, S, grid, 10_000, 42)
    ]
    r = stats.test_stationary_increments(paths, 0.0, 0.75, 0.25, proj_of(S, 0), alpha=0.01)
    assert r.p_value < 1e-4 and not r.passed


def test_stationarity_preconditions(wiener_paths):
    S, paths = wiener_paths
    with pytest.raises(ValueError, match="lie in"):
        stats.test_stationary_increments(paths, 0.0, 0.9, 0.25, proj_of(S, 0))
    with pytest.raises(ValueError, match="replications"):
        stats.test_stationary_increments(paths[:50], 0.0, 0.5, 0.25, proj_of(S, 0))


# -- independence ------------------------------------------------------------


def test_independence_statistic_against_constant():
    a = np.random.default_rng(5).normal(size=1000)
    assert stats.independence_statistic(a, np.zeros(1000), np.linspace(-3, 3, 7)) < 1e-12


def test_independence_passes_on_wiener(wiener_paths):
    S, paths = wiener_paths
    u = np.linspace(-3, 3, 9)
    r = stats.test_independent_increments(paths, [(0.0, 0.25), (0.25, 0.5), (0.5, 1.0)], proj_of(S, 0, 1), u)
    assert r.passed and r.threshold == pytest.approx(4 / math.sqrt(len(paths)))


def test_independence_detects_dependence(wiener_paths):
    S, paths = wiener_paths
    a = stats.increments(paths, 0.0, 0.5) @ S.codomain.basis(0).coords
    stat = stats.independence_statistic(a, a, np.linspace(-3, 3, 9))
    assert stat > 5 * 4 / math.sqrt(len(paths))


def test_independence_preconditions(wiener_paths):
    S, paths = wiener_paths
    with pytest.raises(ValueError, match="overlap"):
        stats.test_independent_increments(paths, [(0.0, 0.5), (0.25, 0.75)], proj_of(S, 0), [1.0])
    with pytest.raises(ValueError, match="two"):
        stats.test_independent_increments(paths, [(0.0, 0.5)], proj_of(S, 0), [1.0])


# -- stochastic continuity -----------------------------------------------------


def test_exceedance_at_zero_step(wiener_paths):
    _, paths = wiener_paths
    assert stats.exceedance_probability(paths, 0.5, 0.0, 1e-9) == 0.0


def test_dyadic_ladder():
    grid = TimeGrid.uniform(1.0, 16)
    assert stats.dyadic_ladder(grid, 0.5) == [0.5, 0.25, 0.125, 0.0625]
    with pytest.raises(ValueError, match="refine"):
        stats.dyadic_ladder(grid, 0.5, dt_max=0.5, levels=6)
    with pytest.raises(ValueError, match="refine"):
        stats.dyadic_ladder(grid, 0.51)


def test_continuity_wiener_chebyshev(wiener_paths):
    S, paths = wiener_paths
    eps = 1.0
    r = stats.test_stochastic_continuity(paths, 0.5, [eps], floor=0.1)
    assert r.passed
    probs = r.details["probabilities"][repr(eps)]
    bounds = [S.hs_norm_sq * dt / eps**2 for dt in r.details["ladder"]]
    assert sum(p <= b for p, b in zip(probs, bounds)) >= 0.95 * len(probs)


def test_continuity_compound_poisson_no_arrival_oracle():
    lam, R = 2.0, 10_000
    S = random_operator(2.0 ** -np.arange(6), 8, 8, np.random.default_rng(6))
    paths = radonify_ensemble(CoordinateLevyModel.compound_poisson(lam), S, TimeGrid.uniform(1.0, 32), R, 43)
    r = stats.test_stochastic_continuity(paths, 0.5, [1e-6], floor=0.1)
    assert r.passed
    for dt, p in zip(r.details["ladder"], r.details["probabilities"][repr(1e-6)]):
        target = 1 - math.exp(-lam * dt)
        assert abs(p - target) < 3 * math.sqrt(target * (1 - target) / R)


def test_continuity_fails_for_jumpy_floor():
    paths = radonify_ensemble(
        CoordinateLevyModel.compound_poisson(40.0), diagonal_operator([1.0], 2), TimeGrid.uniform(1.0, 8), 200, 44
    )
    assert not stats.test_stochastic_continuity(paths, 0.5, [1e-6], floor=0.05).passed


# -- cf matching -------------------------------------------------------------


def test_cf_match_gaussian_target():
    S = diagonal_operator(2.0 ** -np.arange(1, 7), 8)
    g = S.codomain.basis(0)
    u = np.linspace(-4, 4, 21)
    r = stats.cf_match(WIENER, S, g, 1.0, u, 20_000, 7)
    assert r.passed
    paths = radonify_ensemble(WIENER, S, TimeGrid.uniform(1.0, 1), 20_000, 7)
    samples = np.array([p.value_at(1.0) @ g.coords for p in paths])
    np.testing.assert_allclose(np.abs(empirical_cf(samples, u) - np.exp(-(u**2) / 8)).max(), r.statistic, atol=1e-12)


def test_cf_match_zero_frequency_exact():
    S = diagonal_operator([0.5], 2)
    assert stats.cf_match(WIENER, S, S.codomain.basis(0), 1.0, [0.0], 50, 1).statistic == 0.0


def test_cf_match_compound_poisson():
    rng = np.random.default_rng(9)
    S = random_operator(2.0 ** -np.arange(5), 8, 6, rng)
    g = S.codomain.random(rng)
    model = CoordinateLevyModel.compound_poisson(2.0)
    r = stats.cf_match(model, S, g, 1.0, np.linspace(-3, 3, 21), 10_000, 8, grid=TimeGrid.uniform(1.0, 2))
    assert r.passed


def test_cf_match_without_closed_form():
    model = CoordinateLevyModel.compound_poisson(1.0, CallableJumps(lambda rng, n: rng.uniform(size=n)))
    S = diagonal_operator([1.0], 2)
    with pytest.raises(ValueError, match="closed-form"):
        stats.cf_match(model, S, S.codomain.basis(0), 1.0, [1.0], 10, 1)


# -- misc --------------------------------------------------------------------


def test_zero_start_and_version_identity():
    S = random_operator([1.0, 0.5, 0.25], 6, 5, np.random.default_rng(3))
    grid = TimeGrid.uniform(1.0, 8)
    bundles = [simulate_bundle(WIENER, grid, 6, 3, r) for r in range(5)]
    paths = [radonify_series(b, S) for b in bundles]
    assert stats.test_zero_start(paths).passed
    r = stats.test_version_identity(paths, bundles, S, [S.codomain.basis(0), S.codomain.random(np.random.default_rng(1))])
    assert r.passed and r.statistic < 1e-12


def test_projection_validation():
    with pytest.raises(ValueError):
        FiniteDimensionalProjection([])
    with pytest.raises(ValueError):
        FiniteDimensionalProjection([Space("G", 2).basis(0), Space("G", 3).basis(0)])
    proj = FiniteDimensionalProjection([Space("G", 2).basis(1)])
    np.testing.assert_array_equal(proj(np.array([[1.0, 2.0], [3.0, 4.0]])), [[2.0], [4.0]])


def test_reports_are_deterministic_and_serializable(tmp_path, wiener_paths):
    S, paths = wiener_paths
    a = stats.test_stationary_increments(paths, 0.0, 0.5, 0.25, proj_of(S, 0), seed=41)
    b = stats.test_stationary_increments(paths, 0.0, 0.5, 0.25, proj_of(S, 0), seed=41)
    assert a == b
    stats.write_reports_jsonl([a, b], tmp_path / "r.jsonl", {"config_hash": "abc"})
    rows = [json.loads(line) for line in (tmp_path / "r.jsonl").read_text().splitlines()]
    assert len(rows) == 2 and rows[0]["config_hash"] == "abc" and rows[0]["seed"] == 41
    stats.write_summary_csv([a], tmp_path / "s.csv")
    header, row = (tmp_path / "s.csv").read_text().splitlines()
    assert header == "name,statistic,p_value,passed,seed" and row.startswith("stationary_increments,")


def test_report_dataclass_not_collected():
    assert TestReport.__test__ is False
    assert stats.test_stationary_increments.__test__ is False
