"""Estimators that recover the path fluctuation from photon counts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import core
from .core import ExperimentConfig
from .errors import (
    EmptyBinError,
    PostSelectionSingularError,
    StatisticalInsufficiencyError,
)
from .sampler import BinnedCounts, run_experiment

#: floor on the analytic value when forming relative errors (maxima have eps^2 = 0)
RELATIVE_ERROR_FLOOR = 1e-3

DEFAULT_CEILING = 1e3
DEFAULT_CONFIDENCE = 0.99


def _z(confidence):
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    return stats.norm.ppf(0.5 + 0.5 * confidence)


def wilson_interval(n_v, n_total, confidence=DEFAULT_CONFIDENCE):
    n_v = np.asarray(n_v, dtype=float)
    n = np.asarray(n_total, dtype=float)
    z = _z(confidence)
    p_hat = n_v / n
    z2n = z * z / n
    center = (p_hat + 0.5 * z2n) / (1 + z2n)
    half = z / (1 + z2n) * np.sqrt(p_hat * (1 - p_hat) / n + 0.25 * z2n / n)
    lo = np.clip(center - half, 0.0, p_hat)
    hi = np.clip(center + half, p_hat, 1.0)
    return lo, hi


def clopper_pearson_interval(n_v, n_total, confidence=DEFAULT_CONFIDENCE):
    k = np.asarray(n_v, dtype=float)
    n = np.asarray(n_total, dtype=float)
    alpha = 1 - confidence
    with np.errstate(invalid="ignore"):
        lo = np.where(k > 0, stats.beta.ppf(alpha / 2, k, n - k + 1), 0.0)
        hi = np.where(k < n, stats.beta.ppf(1 - alpha / 2, k + 1, n - k), 1.0)
    return lo, hi


_INTERVALS = {"wilson": wilson_interval, "clopper-pearson": clopper_pearson_interval}


def estimate_PV(n_V, n_total, confidence=DEFAULT_CONFIDENCE, method="wilson"):
    """Fraction of vertical photons in a bin with its confidence interval.

    Parameters
    ----------
    n_V, n_total : int or array_like of int
        Vertical and total detections.
    confidence : float
        Two-sided confidence level.
    method : {"wilson", "clopper-pearson"}

    Returns
    -------
    p_hat, ci_low, ci_high

    Raises
    ------
    EmptyBinError
        If any ``n_total`` is zero.
    """
    n_V = np.asarray(n_V)
    n_total = np.asarray(n_total)
    if np.any(n_total <= 0):
        raise EmptyBinError("cannot estimate a proportion from an empty bin")
    if np.any(n_V < 0) or np.any(n_V > n_total):
        raise ValueError("need 0 <= n_V <= n_total")
    p_hat = n_V / n_total
    lo, hi = _INTERVALS[method](n_V, n_total, confidence)
    if p_hat.ndim == 0:
        return float(p_hat), float(lo), float(hi)
    return p_hat, lo, hi


@dataclass(frozen=True)
class FluctuationEstimate:
    """Path fluctuation estimated in one bin.

    ``analytic`` is the path fluctuation averaged over the bin with the
    undisturbed pattern as weight (the ``theta -> 0`` value); ``expected`` is
    what the estimator converges to at the actual ``theta``, the
    density-weighted bin average of ``P(V|p)`` divided by the same
    normalization as ``eps2_hat``.
    """

    bin_center: float
    eps2_hat: float
    ci_low: float
    ci_high: float
    n_total: int
    n_V: int
    analytic: float
    expected: float
    flag: str = ""


def _normalization(theta, theta_squared):
    return theta**2 if theta_squared else np.sin(theta) ** 2


def bin_references(counts: BinnedCounts):
    """Per-bin ``(mass, V fraction, eps^2 bin average)`` from the model."""
    config = counts.config
    edges_p = core.momentum_from_phase(counts.bin_edges, config)
    mass, mass_v = core.bin_probabilities(edges_p, config)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(mass > 0, mass_v / mass, 1.0)
    eps2 = core.bin_average_path_fluctuation(edges_p, config)
    return mass, q, eps2


def estimate_path_fluctuation(
    counts: BinnedCounts,
    confidence: float = DEFAULT_CONFIDENCE,
    *,
    theta_squared: bool = False,
    ceiling: float = DEFAULT_CEILING,
    method: str = "wilson",
) -> list[FluctuationEstimate]:
    """Path fluctuation per bin from the fraction of vertical photons.

    ``eps2_hat = n_V / (n_total sin^2 theta)``; with ``theta_squared=True``
    the fraction is divided by ``theta^2`` instead.  Both agree as
    ``theta -> 0`` but ``sin^2`` removes the leading finite-angle bias.

    Empty bins are returned with NaN estimates and flag ``"empty"``.  Bins
    whose analytic value exceeds ``ceiling`` are flagged ``"near_singular"``.
    """
    if not counts.theta > 0:
        raise ValueError("path fluctuation needs theta > 0")
    norm = _normalization(counts.theta, theta_squared)
    _, q, eps2 = bin_references(counts)
    out = []
    for i, x in enumerate(counts.bin_centers):
        n, k = int(counts.n_total[i]), int(counts.n_V[i])
        flag = "near_singular" if eps2[i] > ceiling else ""
        if n == 0:
            est = lo = hi = float("nan")
            flag = "empty"
        else:
            p_hat, p_lo, p_hi = estimate_PV(k, n, confidence, method)
            est, lo, hi = p_hat / norm, p_lo / norm, p_hi / norm
        out.append(
            FluctuationEstimate(float(x), est, lo, hi, n, k, float(eps2[i]), float(q[i] / norm), flag)
        )
    return out


@dataclass(frozen=True)
class ThetaSweepRow:
    theta: float
    bin_center: float
    eps2_hat: float
    analytic: float
    relative_error: float


def theta_sweep(
    config_base: ExperimentConfig,
    thetas,
    n_photons: int,
    seed: int,
    n_bins: int = 100,
    window=(-np.pi, np.pi),
    *,
    theta_squared: bool = False,
    workers: int = 1,
) -> list[ThetaSweepRow]:
    """Estimate the path fluctuation at several rotation angles.

    Each angle is simulated with the same seed and binning.  The
    ``relative_error`` is ``|eps2_hat - analytic| / max(analytic, 1e-3)``.
    Rows keep the order of ``thetas``.
    """
    thetas = list(thetas)
    if not thetas:
        raise ValueError("need at least one theta")
    if any(not t > 0 for t in thetas):
        raise ValueError("all thetas must be positive")
    rows = []
    for theta in thetas:
        counts = run_experiment(
            config_base.with_theta(theta), n_photons, seed, n_bins, window, workers=workers
        )
        for est in estimate_path_fluctuation(counts, theta_squared=theta_squared):
            rel = abs(est.eps2_hat - est.analytic) / max(est.analytic, RELATIVE_ERROR_FLOOR)
            rows.append(ThetaSweepRow(theta, est.bin_center, est.eps2_hat, est.analytic, rel))
    return rows


def sweep_summary(rows, max_abs_phase: float = 2 * np.pi / 3) -> dict:
    """Median relative error per angle over bins with ``|x| <= max_abs_phase``.

    ``monotone`` is true when the median error shrinks strictly as theta
    decreases.
    """
    thetas = list(dict.fromkeys(r.theta for r in rows))
    medians = {}
    for theta in thetas:
        errs = [
            r.relative_error
            for r in rows
            if r.theta == theta and abs(r.bin_center) <= max_abs_phase and np.isfinite(r.relative_error)
        ]
        medians[theta] = float(np.median(errs)) if errs else float("nan")
    ordered = [medians[t] for t in sorted(thetas, reverse=True)]
    monotone = all(b < a for a, b in zip(ordered, ordered[1:]))
    return {
        "thetas": thetas,
        "median_relative_error": [medians[t] for t in thetas],
        "max_abs_phase": max_abs_phase,
        "monotone": monotone,
    }


def weak_value_path(p, config: ExperimentConfig):
    """Weak values of the two path projectors post-selected on detection at ``p``.

    The input is the symmetric superposition of both paths; the common
    envelope cancels, so ``w1 = e^{iu} / (e^{iu} + e^{-iu}) = 1/2 + (i/2) tan u``
    with ``u = d p / (2 hbar)``.

    Raises
    ------
    PostSelectionSingularError
        Where ``cos u = 0`` and the outcome is orthogonal to the input.
    """
    u = 0.5 * core.fringe_phase(p, config)
    k1 = np.exp(1j * u)
    k2 = np.exp(-1j * u)
    overlap = k1 + k2
    if np.any(np.abs(overlap) < 1e-14):
        raise PostSelectionSingularError("weak value undefined at an exact dark fringe")
    return k1 / overlap, k2 / overlap


@dataclass(frozen=True)
class GofResult:
    chi2_total: float
    dof_total: int
    p_total: float
    chi2_conditional: float
    dof_conditional: int
    p_conditional: float

    @property
    def p_values(self):
        return self.p_total, self.p_conditional


def _pool(expected, min_expected):
    """Group consecutive bins until each group's expectation reaches ``min_expected``."""
    groups, current, acc = [], [], 0.0
    for i, e in enumerate(expected):
        current.append(i)
        acc += e
        if acc >= min_expected:
            groups.append(current)
            current, acc = [], 0.0
    if current and groups:
        groups[-1].extend(current)
    return groups


def goodness_of_fit(counts: BinnedCounts, config: ExperimentConfig | None = None, min_expected: float = 5.0) -> GofResult:
    """Chi-square tests of a histogram against the coherent model.

    The first test compares bin totals with the detection probability of each
    bin (multinomial, ``groups - 1`` degrees of freedom).  The second
    compares vertical counts with the bin-averaged ``P(V|p)`` given the bin
    totals, one degree of freedom per group.  Neighbouring bins are pooled
    until the expected count reaches ``min_expected``; for the conditional
    test both the expected V and H counts must reach it.

    Raises
    ------
    StatisticalInsufficiencyError
        When either test is left with no usable group.
    """
    if config is not None and config != counts.config:
        counts = BinnedCounts(
            counts.bin_edges, counts.n_total, counts.n_V, counts.seeds, counts.n_photons, config, counts.model
        )
    if counts.n_photons == 0:
        raise StatisticalInsufficiencyError("no photons to test")
    mass, q, _ = bin_references(counts)
    n = counts.n_photons
    exp_total = n * mass / mass.sum()
    groups = _pool(exp_total, min_expected)
    if len(groups) < 2:
        raise StatisticalInsufficiencyError("all bins pooled into one group; need more photons")
    obs = np.array([counts.n_total[g].sum() for g in groups], dtype=float)
    exp = np.array([exp_total[g].sum() for g in groups])
    chi2_total = float(np.sum((obs - exp) ** 2 / exp))
    dof_total = len(groups) - 1

    n_tot = counts.n_total.astype(float)
    exp_v = n_tot * q
    exp_h = n_tot - exp_v
    groups_c = _pool(np.minimum(exp_v, exp_h), min_expected)
    if not groups_c:
        raise StatisticalInsufficiencyError("too few expected V detections for the conditional test")
    chi2_cond = 0.0
    for g in groups_c:
        var = np.sum(n_tot[g] * q[g] * (1 - q[g]))
        chi2_cond += (counts.n_V[g].sum() - exp_v[g].sum()) ** 2 / var
    dof_cond = len(groups_c)
    return GofResult(
        chi2_total,
        dof_total,
        float(stats.chi2.sf(chi2_total, dof_total)),
        float(chi2_cond),
        dof_cond,
        float(stats.chi2.sf(chi2_cond, dof_cond)),
    )


@dataclass(frozen=True)
class AnalyticProfile:
    """Tabulated analytic curves over fringe phase.

    ``eps2`` is clamped at ``ceiling``; ``flag`` marks ``"divergent"`` points
    (exact minima) and ``"clamped"`` finite points above the ceiling.
    ``p_v`` is NaN where the conditional probability is undefined.
    """

    x: np.ndarray
    pattern: np.ndarray
    eps2: np.ndarray
    p_v: np.ndarray
    flag: np.ndarray
    ceiling: float


def analytic_profile(
    config: ExperimentConfig,
    window=(-np.pi, np.pi),
    n_points: int = 1001,
    ceiling: float = DEFAULT_CEILING,
    x=None,
) -> AnalyticProfile:
    """Fringe factor, path fluctuation and ``P(V|x)`` on a grid of fringe phases.

    The grid is ``linspace(*window, n_points)`` unless explicit phases ``x``
    are given.
    """
    if x is None:
        lo, hi = float(window[0]), float(window[1])
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"invalid window {window!r}")
        if n_points < 2:
            raise ValueError("n_points must be >= 2")
        x = np.linspace(lo, hi, int(n_points))
    x = np.asarray(x, dtype=float)
    raw = core.path_fluctuation_at_phase(x)
    flag = np.where(np.isinf(raw), "divergent", np.where(raw > ceiling, "clamped", ""))
    p = core.momentum_from_phase(x, config)
    wh, wv = core._polarization_weights(p, config)
    total = wh + wv
    defined = total >= core._DARK_INTENSITY
    p_v = np.full_like(x, np.nan)
    p_v[defined] = core.conditional_V_probability(p[defined], config)
    return AnalyticProfile(x, core.fringe_factor(x), np.minimum(raw, ceiling), p_v, flag, ceiling)
