import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from whichway import analysis, core
from whichway.analysis import estimate_PV, estimate_path_fluctuation, goodness_of_fit, weak_value_path
from whichway.core import ExperimentConfig
from whichway.errors import EmptyBinError, PostSelectionSingularError, StatisticalInsufficiencyError
from whichway.sampler import BinnedCounts, run_experiment

CFG = ExperimentConfig()


def wilson_oracle(k, n, conf):
    """Wilson score interval from the quadratic |p_hat - p| = z sqrt(p (1 - p) / n)."""
    z = stats.norm.ppf(0.5 + conf / 2)
    p_hat = k / n
    roots = np.roots([1 + z * z / n, -(2 * p_hat + z * z / n), p_hat * p_hat])
    return sorted(float(np.real(r)) for r in roots)


# --- proportion estimates ----------------------------------------------------------


def test_wilson_examples():
    p, lo, hi = estimate_PV(0, 100, 0.95)
    assert p == 0 and lo == 0
    assert hi == pytest.approx(0.0370, abs=5e-5)
    p, lo, hi = estimate_PV(100, 100, 0.95)
    assert p == 1 and hi == 1
    assert lo == pytest.approx(0.9630, abs=5e-5)
    p, lo, hi = estimate_PV(50, 100, 0.95)
    assert p == 0.5
    assert 0.5 - lo == pytest.approx(hi - 0.5, rel=1e-12)


@given(st.integers(1, 10**6), st.floats(0, 1), st.sampled_from([0.9, 0.95, 0.99]))
def test_wilson_against_quadratic_roots(n, frac, conf):
    k = int(round(frac * n))
    p, lo, hi = estimate_PV(k, n, conf)
    r_lo, r_hi = wilson_oracle(k, n, conf)
    assert lo == pytest.approx(max(r_lo, 0.0), abs=1e-9)
    assert hi == pytest.approx(min(r_hi, 1.0), abs=1e-9)
    assert lo <= p <= hi


def test_clopper_pearson_contains_wilson_roughly():
    p, lo, hi = estimate_PV(7, 200, 0.95, method="clopper-pearson")
    assert lo == pytest.approx(stats.beta.ppf(0.025, 7, 194), rel=1e-12)
    assert hi == pytest.approx(stats.beta.ppf(0.975, 8, 193), rel=1e-12)
    assert estimate_PV(0, 10, 0.95, method="clopper-pearson")[1] == 0.0
    assert estimate_PV(10, 10, 0.95, method="clopper-pearson")[2] == 1.0


def test_estimate_pv_errors():
    with pytest.raises(EmptyBinError):
        estimate_PV(0, 0)
    with pytest.raises(ValueError):
        estimate_PV(5, 3)
    with pytest.raises(ValueError):
        estimate_PV(1, 3, confidence=1.0)


def test_wilson_coverage():
    """Coverage of 95% intervals over 10^4 synthetic bins drawn like real data."""
    rng = np.random.default_rng(2024)
    x = rng.uniform(-2.5, 2.5, 10**4)
    q = core.conditional_V_probability(x, CFG.with_theta(0.05))
    n = rng.integers(2_000, 200_000, 10**4)
    k = rng.binomial(n, q)
    _, lo, hi = estimate_PV(k, n, 0.95)
    coverage = np.mean((lo <= q) & (q <= hi))
    assert coverage >= 0.95 - 0.01


# --- path fluctuation estimates --------------------------------------------------------


def synthetic(n_total, n_v, theta=0.05, edges=None):
    n_total = np.asarray(n_total)
    edges = np.linspace(-np.pi, np.pi, len(n_total) + 1) if edges is None else edges
    return BinnedCounts(edges, n_total, np.asarray(n_v), (0,), int(n_total.sum()), CFG.with_theta(theta))


def test_all_horizontal_bin_gives_zero():
    est = estimate_path_fluctuation(synthetic([100, 200], [0, 0]))
    assert est[0].eps2_hat == 0.0 and est[0].ci_low == 0.0
    assert est[0].ci_high > 0


def test_empty_bins_flagged_not_filled():
    est = estimate_path_fluctuation(synthetic([0, 200], [0, 3]))
    assert est[0].flag == "empty" and np.isnan(est[0].eps2_hat)
    assert est[1].flag == ""


def test_normalizations():
    counts = synthetic([1000, 1000], [5, 10], theta=0.1)
    default = estimate_path_fluctuation(counts)
    literal = estimate_path_fluctuation(counts, theta_squared=True)
    assert default[0].eps2_hat == pytest.approx(0.005 / np.sin(0.1) ** 2, rel=1e-14)
    assert literal[0].eps2_hat == pytest.approx(0.005 / 0.01, rel=1e-14)
    for e in default + literal:
        assert e.ci_low <= e.eps2_hat <= e.ci_high


def test_requires_rotation():
    with pytest.raises(ValueError):
        estimate_path_fluctuation(synthetic([10, 10], [0, 0], theta=0.0))


def test_near_singular_flag():
    counts = run_experiment(CFG, 10**5, 1, 100)
    est = estimate_path_fluctuation(counts, ceiling=1e3)
    flags = [e.flag for e in est]
    assert flags[0] == "near_singular" and flags[-1] == "near_singular"
    assert flags[50] == ""
    assert all(np.isfinite(e.eps2_hat) for e in est if e.flag != "empty")


@pytest.fixture(scope="module")
def big_run():
    return run_experiment(CFG.with_theta(0.05), 10**7, 77, 100)


def _bin_containing(counts, x):
    return int(np.searchsorted(counts.bin_edges, x) - 1)


@pytest.mark.slow
@pytest.mark.parametrize("x, value", [(np.pi / 2, 1.0), (2 * np.pi / 3, 3.0)])
def test_estimate_recovers_analytic_values(big_run, x, value):
    # narrow bins centred on x so that the bin average is close to the point value
    edges = np.array([x - 0.02, x + 0.02])
    cfg = big_run.config
    avg = core.bin_average_path_fluctuation(core.momentum_from_phase(edges, cfg), cfg)[0]
    assert avg == pytest.approx(value, rel=2e-3)
    est = estimate_path_fluctuation(big_run)
    e = est[_bin_containing(big_run, x)]
    assert e.ci_low <= e.expected <= e.ci_high
    assert e.eps2_hat == pytest.approx(core.path_fluctuation_at_phase(e.bin_center), rel=0.15)


@pytest.mark.slow
def test_finite_angle_bias_matches_closed_form():
    """At theta = 0.2 the estimator converges to bin-averaged P(V|p)/sin^2, not eps^2."""
    theta = 0.2
    counts = run_experiment(CFG.with_theta(theta), 10**7, 5, 100)
    e = estimate_path_fluctuation(counts)[_bin_containing(counts, np.pi / 3)]
    # closed-form discrepancy at the bin center: 1 / (cos^2 + sin^2 eps^2) - 1
    eps2 = core.path_fluctuation_at_phase(e.bin_center)
    bias = eps2 * (1 / (np.cos(theta) ** 2 + np.sin(theta) ** 2 * eps2) - 1)
    assert e.expected - e.analytic == pytest.approx(bias, rel=0.02)
    assert e.ci_low - e.analytic <= bias <= e.ci_high - e.analytic


# --- theta sweep -------------------------------------------------------------------------------


def test_sweep_rows_and_analytic_column():
    rows = analysis.theta_sweep(CFG, [0.2, 0.05], 200_000, 3, n_bins=20)
    assert [r.theta for r in rows[:20]] == [0.2] * 20 and rows[20].theta == 0.05
    cfg = CFG
    edges = np.linspace(-np.pi, np.pi, 21)
    analytic = core.bin_average_path_fluctuation(core.momentum_from_phase(edges, cfg), cfg)
    assert np.array_equal([r.analytic for r in rows[:20]], analytic)
    for r in rows:
        assert r.relative_error == pytest.approx(
            abs(r.eps2_hat - r.analytic) / max(r.analytic, analysis.RELATIVE_ERROR_FLOOR)
        )


def test_sweep_single_theta_and_errors():
    rows = analysis.theta_sweep(CFG, [0.1], 10_000, 1, n_bins=4)
    summary = analysis.sweep_summary(rows)
    assert summary["thetas"] == [0.1] and summary["monotone"] is True
    with pytest.raises(ValueError):
        analysis.theta_sweep(CFG, [], 10, 1)
    with pytest.raises(ValueError):
        analysis.theta_sweep(CFG, [0.1, 0.0], 10, 1)


def test_sweep_bias_shrinks_with_theta():
    """Noise-free trend: the limit of the estimator approaches the path fluctuation as theta -> 0."""
    edges = np.linspace(-np.pi, np.pi, 101)
    centers = 0.5 * (edges[1:] + edges[:-1])
    keep = np.abs(centers) <= 2 * np.pi / 3
    medians = []
    for theta in (0.2, 0.05, 0.01):
        cfg = CFG.with_theta(theta)
        counts = BinnedCounts(edges, np.ones(100, dtype=np.int64), np.zeros(100, dtype=np.int64), (0,), 100, cfg)
        mass, q, eps2 = analysis.bin_references(counts)
        rel = np.abs(q / np.sin(theta) ** 2 - eps2) / np.maximum(eps2, analysis.RELATIVE_ERROR_FLOOR)
        medians.append(np.median(rel[keep]))
    assert medians[0] > medians[1] > medians[2]
    assert medians[2] < 1e-3


# --- weak values ---------------------------------------------------------------------------


def test_weak_values_at_maximum():
    w1, w2 = weak_value_path(0.0, CFG)
    assert w1 == 0.5 and w2 == 0.5


def test_weak_value_identities():
    rng = np.random.default_rng(5)
    p = rng.uniform(-30, 30, 1000)
    w1, w2 = weak_value_path(p, CFG)
    assert np.max(np.abs(w1 + w2 - 1)) < 1e-12
    assert np.max(np.abs(w1.real - 0.5)) < 1e-12
    assert np.max(np.abs(w2.real - 0.5)) < 1e-12
    eps2 = core.path_fluctuation_analytic(p, CFG)
    assert np.allclose(np.abs(w1 - w2) ** 2, eps2, rtol=1e-9, atol=0)
    assert np.allclose(w1, 0.5 + 0.5j * np.tan(p / 2), rtol=1e-9)


def test_weak_value_singular_at_dark_fringe():
    with pytest.raises(PostSelectionSingularError):
        weak_value_path(np.pi, CFG)


def test_negative_presence_beyond_half_fringe():
    """Imaginary parts grow without bound towards the minima while real parts stay 1/2."""
    w1, _ = weak_value_path(np.array([0.5, 2.0, 3.0, 3.14]), CFG)
    assert np.all(np.diff(np.abs(w1.imag)) > 0)


# --- goodness of fit -------------------------------------------------------------------------


def test_gof_accepts_model_data():
    res = goodness_of_fit(run_experiment(CFG.with_theta(0.1), 10**6, 3, 100))
    assert res.p_total > 1e-4 and res.p_conditional > 1e-4
    assert res.dof_total == 99
    assert res.p_values == (res.p_total, res.p_conditional)


def test_gof_rejects_mixture_data():
    res = goodness_of_fit(run_experiment(CFG.with_theta(0.1), 10**6, 3, 100, model="mixture"))
    assert res.p_conditional < 1e-6


def test_gof_insufficient():
    counts = BinnedCounts.empty(np.linspace(-np.pi, np.pi, 11), CFG)
    with pytest.raises(StatisticalInsufficiencyError):
        goodness_of_fit(counts)
    with pytest.raises(StatisticalInsufficiencyError):
        goodness_of_fit(run_experiment(CFG, 4, 1, 10))


def test_pooling_reaches_threshold():
    groups = analysis._pool([1, 1, 1, 6, 0.5, 0.5], 5)
    assert groups == [[0, 1, 2, 3], [4, 5]] or groups == [[0, 1, 2, 3, 4, 5]]
    assert analysis._pool([1.0, 1.0], 5) == []


# --- analytic profile ---------------------------------------------------------------------


def test_analytic_profile_columns():
    prof = analysis.analytic_profile(CFG, (-np.pi, np.pi), 1001, ceiling=1e3)
    assert prof.eps2[500] == 0.0
    assert prof.eps2[250] == pytest.approx(1.0, rel=1e-9)
    assert prof.flag[0] == "divergent" and prof.flag[-1] == "divergent"
    assert prof.eps2[0] == 1e3
    assert np.trapezoid(prof.pattern, prof.x) / (2 * np.pi) == pytest.approx(1.0, abs=1e-6)
    p0 = analysis.analytic_profile(CFG.with_theta(0.0), n_points=5)
    assert np.isnan(p0.p_v[0]) and p0.p_v[2] == 0.0
    with pytest.raises(ValueError):
        analysis.analytic_profile(CFG, (1.0, 0.0))
