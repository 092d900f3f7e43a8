"""Closed-form model of the polarization-marked double slit.

Photons enter horizontally polarized, pick up a polarization rotation of
+theta in slit 1 and -theta in slit 2, and are detected at transverse
momentum ``p`` in the far field.  Everything here is a pure function of its
arguments and broadcasts over numpy arrays of ``p``.

Units: by default ``hbar = 1`` and ``slit_separation = 1`` so the fringe phase
``x = d * p / hbar`` equals ``p``.  Most quantities depend on ``p`` only
through the half phase ``u = x / 2``.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError, UndefinedConditionalError

H, V = 0, 1

#: rotation angle above which the small-angle identifications are flagged
THETA_SMALL = 0.1

#: default number of CDF / evaluation grid points
DEFAULT_GRID_POINTS = 2**16

# normalized polarization intensity below which a position counts as dark;
# cos(pi/2) evaluates to ~6e-17 in double precision, so its square is ~4e-33
_DARK_INTENSITY = 1e-30


class SmallAngleWarning(UserWarning):
    """A small-rotation approximation is used outside its regime."""


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid over transverse momentum."""

    p_min: float
    p_max: float
    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if not (np.isfinite(self.p_min) and np.isfinite(self.p_max)):
            raise ConfigError("grid bounds must be finite")
        if not self.p_min < self.p_max:
            raise ConfigError(f"need p_min < p_max, got {self.p_min} >= {self.p_max}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ConfigError(f"n_points must be an integer >= 2, got {self.n_points}")

    @classmethod
    def symmetric(cls, p_max: float, n_points: int = DEFAULT_GRID_POINTS) -> "MomentumGrid":
        return cls(-p_max, p_max, n_points)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_points)


#: minimum grid points per fringe period; a linear CDF spreads photons evenly
#: over each cell, which biases P(V) upward unless fringes are well resolved
POINTS_PER_FRINGE = 256


def grid_points_for(span: float, slit_separation: float, hbar: float = 1.0) -> int:
    """Grid size resolving every fringe in a momentum span, at least ``2**16``."""
    periods = span * slit_separation / (2 * np.pi * hbar)
    return max(DEFAULT_GRID_POINTS, int(np.ceil(periods * POINTS_PER_FRINGE)) + 1)


def default_grid(envelope_width: float, slit_separation: float = 1.0, hbar: float = 1.0) -> MomentumGrid:
    """Symmetric grid wide enough to hold all but ~6e-4 of the detection probability.

    The two-sided tail beyond ``|p| > P`` is about ``4 hbar / (pi a P)``.
    """
    p_max = 2000.0 * hbar / envelope_width
    return MomentumGrid.symmetric(p_max, grid_points_for(2 * p_max, slit_separation, hbar))


@dataclass(frozen=True)
class ExperimentConfig:
    """Physical parameters of the experiment.

    Parameters
    ----------
    theta : float
        Polarization rotation in radians, applied as +theta in slit 1 and
        -theta in slit 2.  Must satisfy ``0 <= theta < pi/2``.
    slit_separation : float
        Center-to-center slit distance ``d``.
    envelope_width : float
        Single-slit width ``a`` setting the sinc envelope.  Must not exceed
        ``slit_separation``.  Defaults to ``slit_separation / 4``.
    hbar : float
        Reduced Planck constant in the chosen units, 1 by convention.
    p_grid : MomentumGrid, optional
        Grid used for tabulating the detection distribution.  Defaults to
        :func:`default_grid`.
    """

    theta: float = 0.05
    slit_separation: float = 1.0
    envelope_width: float | None = None
    hbar: float = 1.0
    p_grid: MomentumGrid | None = field(default=None)

    def __post_init__(self):
        if self.envelope_width is None:
            object.__setattr__(self, "envelope_width", self.slit_separation / 4)
        if not (0.0 <= self.theta < np.pi / 2):
            raise ConfigError(f"theta must lie in [0, pi/2), got {self.theta!r}")
        if not self.slit_separation > 0:
            raise ConfigError("slit_separation must be positive")
        if not self.envelope_width > 0:
            raise ConfigError("envelope_width must be positive")
        if self.envelope_width > self.slit_separation:
            raise ConfigError("envelope_width may not exceed slit_separation")
        if not self.hbar > 0:
            raise ConfigError("hbar must be positive")
        if self.p_grid is None:
            object.__setattr__(
                self, "p_grid", default_grid(self.envelope_width, self.slit_separation, self.hbar)
            )

    def with_theta(self, theta: float) -> "ExperimentConfig":
        return replace(self, theta=theta)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        grid = data.pop("p_grid", None)
        if isinstance(grid, dict):
            grid = MomentumGrid(**grid)
        unknown = set(data) - {"theta", "slit_separation", "envelope_width", "hbar"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(p_grid=grid, **data)


def fringe_phase(p, config: ExperimentConfig):
    """Dimensionless fringe phase ``x = d p / hbar``."""
    return config.slit_separation * np.asarray(p, dtype=float) / config.hbar


def momentum_from_phase(x, config: ExperimentConfig):
    return np.asarray(x, dtype=float) * config.hbar / config.slit_separation


def _half_phase(p, config):
    return 0.5 * fringe_phase(p, config)


def _check_theta(theta):
    if not (0.0 <= theta < np.pi / 2):
        raise ConfigError(f"theta must lie in [0, pi/2), got {theta!r}")


@dataclass(frozen=True)
class JointState:
    """Polarization-path amplitudes after the slits.

    ``amp[pol, slit]`` with ``pol`` in ``(H, V)`` and ``slit`` index 0 for
    slit 1, 1 for slit 2.
    """

    amp: np.ndarray

    def __post_init__(self):
        norm = np.sum(np.abs(self.amp) ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"joint state not normalized: {norm}")

    def __getitem__(self, key):
        return self.amp[key]


def prepare_post_slit_state(theta: float) -> JointState:
    """Joint polarization/path state after the opposite rotations in the slits."""
    _check_theta(theta)
    c, s = np.cos(theta), np.sin(theta)
    r = 1 / np.sqrt(2)
    amp = np.array([[r * c, r * c], [r * s, -r * s]], dtype=complex)
    return JointState(amp)


def normalization_constant(config: ExperimentConfig) -> float:
    """Amplitude prefactor ``C`` of the sinc envelope.

    Over the full line ``int sinc^2(a p / 2 hbar) dp = 2 pi hbar / a`` and,
    because the Fourier transform of sinc^2 is a triangle of half-width
    ``a <= d``, the fringe term ``cos(d p / hbar)`` integrates to zero
    against it.  This fixes ``C^2 = a / (2 pi hbar)`` for every theta.
    """
    return float(np.sqrt(config.envelope_width / (2 * np.pi * config.hbar)))


def envelope(p, config: ExperimentConfig):
    """Single-slit amplitude ``f(p) = C sinc(a p / (2 hbar))`` with ``sinc(0) = 1``."""
    p = np.asarray(p, dtype=float)
    # np.sinc is the normalized sinc, sin(pi t) / (pi t)
    t = config.envelope_width * p / (2 * np.pi * config.hbar)
    return normalization_constant(config) * np.sinc(t)


def slit_amplitude(p, slit: int, config: ExperimentConfig):
    """Momentum-space amplitude of the path through ``slit`` (1 or 2)."""
    if slit not in (1, 2):
        raise ValueError(f"slit must be 1 or 2, got {slit!r}")
    sign = 1.0 if slit == 1 else -1.0
    return envelope(p, config) * np.exp(sign * 1j * _half_phase(p, config))


@dataclass(frozen=True)
class ScreenAmplitude:
    """H and V amplitudes of the photon detected at momentum ``p``."""

    p: np.ndarray
    a_H: np.ndarray
    a_V: np.ndarray

    @property
    def density(self):
        return np.abs(self.a_H) ** 2 + np.abs(self.a_V) ** 2

    @property
    def jones(self) -> np.ndarray:
        """Jones vectors stacked along the last axis."""
        return np.stack(np.broadcast_arrays(self.a_H, self.a_V), axis=-1)


def screen_amplitude(p, config: ExperimentConfig) -> ScreenAmplitude:
    """Polarization amplitudes on the screen.

    ``a_H = sqrt(2) f cos(theta) cos(u)`` and ``a_V = i sqrt(2) f sin(theta) sin(u)``
    with ``u = d p / (2 hbar)``: an elliptical polarization with axes fixed
    along H and V.
    """
    p = np.asarray(p, dtype=float)
    u = _half_phase(p, config)
    f = np.sqrt(2.0) * envelope(p, config)
    a_H = (f * np.cos(config.theta) * np.cos(u)).astype(complex)
    a_V = 1j * f * np.sin(config.theta) * np.sin(u)
    return ScreenAmplitude(p, a_H, a_V)


def detection_density(p, config: ExperimentConfig):
    """Probability density of detecting the photon at momentum ``p``.

    Equal to ``|a_H|^2 + |a_V|^2``, written as a sum of nonnegative terms so
    that it stays accurate near the dark fringes.
    """
    p = np.asarray(p, dtype=float)
    u = _half_phase(p, config)
    c2, s2 = np.cos(config.theta) ** 2, np.sin(config.theta) ** 2
    f2 = envelope(p, config) ** 2
    return 2 * f2 * (c2 * np.cos(u) ** 2 + s2 * np.sin(u) ** 2)


def vertical_density(p, config: ExperimentConfig):
    """Joint density ``|a_V(p)|^2`` of detecting a V photon at ``p``."""
    p = np.asarray(p, dtype=float)
    u = _half_phase(p, config)
    return 2 * envelope(p, config) ** 2 * np.sin(config.theta) ** 2 * np.sin(u) ** 2


def undisturbed_pattern(p, config: ExperimentConfig):
    """Detection density without rotations, ``|f|^2 (1 + cos(d p / hbar))``."""
    p = np.asarray(p, dtype=float)
    u = _half_phase(p, config)
    # 1 + cos(2u) = 2 cos^2(u), free of cancellation at the minima
    return 2 * envelope(p, config) ** 2 * np.cos(u) ** 2


def fringe_factor(x):
    """Interference factor ``1 + cos x``; its average over a period is one."""
    return 1.0 + np.cos(np.asarray(x, dtype=float))


def _polarization_weights(p, config):
    u = _half_phase(p, config)
    wv = (np.sin(config.theta) * np.sin(u)) ** 2
    wh = (np.cos(config.theta) * np.cos(u)) ** 2
    return wh, wv


def conditional_polarization(p, config: ExperimentConfig):
    """Return ``(P(H|p), P(V|p))``.

    Raises
    ------
    UndefinedConditionalError
        If the detection probability at some ``p`` vanishes (a dark fringe
        with ``theta = 0``).
    """
    wh, wv = _polarization_weights(p, config)
    total = wh + wv
    if np.any(total < _DARK_INTENSITY):
        raise UndefinedConditionalError(
            "conditional polarization undefined where the detection density is zero"
        )
    return wh / total, wv / total


def conditional_V_probability(p, config: ExperimentConfig):
    """Probability of vertical polarization given detection at ``p``.

    Algebraically ``tan^2(theta) tan^2(u) / (1 + tan^2(theta) tan^2(u))``,
    evaluated as ``(sin theta sin u)^2 / ((sin theta sin u)^2 + (cos theta cos u)^2)``
    so that exact dark fringes give 1 instead of an overflow.
    """
    return conditional_polarization(p, config)[1]


@dataclass(frozen=True)
class PolarizationDensity:
    """2x2 polarization density matrix over (H, V)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = self.rho
        if rho.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-12:
            raise ValueError("density matrix trace differs from one")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-12:
            raise ValueError("density matrix has a negative eigenvalue")

    @property
    def p_V(self) -> float:
        return float(self.rho[V, V].real)

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


def mixture_density(theta: float) -> PolarizationDensity:
    """Polarization state of a random choice between rotations +theta and -theta."""
    _check_theta(theta)
    rho = np.diag([np.cos(theta) ** 2, np.sin(theta) ** 2]).astype(complex)
    return PolarizationDensity(rho)


def screen_polarization_density(p: float, config: ExperimentConfig) -> PolarizationDensity:
    """Normalized polarization state of photons detected at a single ``p``."""
    amp = screen_amplitude(float(p), config).jones
    norm = np.sum(np.abs(amp) ** 2)
    if norm < _DARK_INTENSITY * envelope(float(p), config) ** 2:
        raise UndefinedConditionalError("no photons are detected at this momentum")
    v = amp / np.sqrt(norm)
    return PolarizationDensity(np.outer(v, v.conj()))


def rotation_uncertainty_sq(p_v):
    """Squared rotation-angle uncertainty identified with the V probability.

    The identification ``dphi^2 ~ P(V)`` only holds for ``P(V) << 1``; a
    :class:`SmallAngleWarning` is issued above ``sin^2(THETA_SMALL)``.
    """
    p_v = np.asarray(p_v, dtype=float)
    if np.any((p_v < 0) | (p_v > 1)):
        raise ValueError("P(V) must lie in [0, 1]")
    if np.any(p_v > np.sin(THETA_SMALL) ** 2):
        warnings.warn("P(V) too large for the small-angle identification", SmallAngleWarning, stacklevel=2)
    return p_v[()] if p_v.ndim == 0 else p_v.copy()


def rotation_uncertainty_profile(p, config: ExperimentConfig):
    """Small-angle rotation uncertainty ``theta^2 tan^2(u)`` at momentum ``p``."""
    if config.theta > THETA_SMALL:
        warnings.warn(
            f"theta={config.theta} exceeds the small-angle regime ({THETA_SMALL} rad)",
            SmallAngleWarning,
            stacklevel=2,
        )
    return config.theta**2 * np.tan(_half_phase(p, config)) ** 2


def path_fluctuation_at_phase(x):
    """Normalized path fluctuation ``(1 - cos x) / (1 + cos x)`` at fringe phase ``x``.

    Computed as ``tan^2(x/2)`` which avoids the cancellation in ``1 + cos x``
    near the minima.  Where ``1 + cos x`` is exactly zero in floating point
    the result is ``+inf``.
    """
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    with np.errstate(divide="ignore"):
        out = (np.sin(half) / np.cos(half)) ** 2
    out = np.where(1.0 + np.cos(x) == 0.0, np.inf, out)
    return out[()] if out.ndim == 0 else out


def path_fluctuation_analytic(p, config: ExperimentConfig):
    """Normalized path fluctuation at momentum ``p``; zero at maxima, infinite at minima."""
    return path_fluctuation_at_phase(fringe_phase(p, config))


def integrate_bins(func, edges, max_panel: float, order: int = 16) -> np.ndarray:
    """Integrate ``func`` over consecutive intervals ``[edges[i], edges[i+1]]``.

    Each interval is split into panels no wider than ``max_panel`` and each
    panel is integrated by Gauss-Legendre quadrature of the given order.
    """
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    n_sub = np.maximum(1, np.ceil(np.diff(edges) / max_panel).astype(int))
    bin_of_panel = np.repeat(np.arange(len(n_sub)), n_sub)
    offsets = np.arange(n_sub.sum()) - np.repeat(np.cumsum(n_sub) - n_sub, n_sub)
    width = np.diff(edges)[bin_of_panel] / n_sub[bin_of_panel]
    lo = edges[:-1][bin_of_panel] + offsets * width
    nodes, weights = np.polynomial.legendre.leggauss(order)
    pts = lo[:, None] + 0.5 * width[:, None] * (nodes[None, :] + 1.0)
    vals = np.asarray(func(pts), dtype=float)
    panel = 0.5 * width * (vals @ weights)
    return np.bincount(bin_of_panel, weights=panel, minlength=len(n_sub))


def _panel_width(config):
    # an eighth of a fringe period or of an envelope lobe, whichever is smaller
    fringe = 2 * np.pi * config.hbar / config.slit_separation
    lobe = 2 * np.pi * config.hbar / config.envelope_width
    return min(fringe, lobe) / 8


def bin_probabilities(edges_p, config: ExperimentConfig):
    """Detection probability and V-detection probability in each momentum bin."""
    w = _panel_width(config)
    mass = integrate_bins(lambda q: detection_density(q, config), edges_p, w)
    mass_v = integrate_bins(lambda q: vertical_density(q, config), edges_p, w)
    return mass, mass_v


def bin_average_path_fluctuation(edges_p, config: ExperimentConfig):
    """Path fluctuation averaged over each bin with the undisturbed pattern as weight.

    ``int rho_0 eps^2 / int rho_0`` where ``rho_0 eps^2 = 2 |f|^2 sin^2(u)``.
    This is the ``theta -> 0`` limit of the per-bin V fraction divided by
    ``sin^2 theta``.
    """
    w = _panel_width(config)

    def weighted(q):
        return 2 * envelope(q, config) ** 2 * np.sin(_half_phase(q, config)) ** 2

    num = integrate_bins(weighted, edges_p, w)
    den = integrate_bins(lambda q: undisturbed_pattern(q, config), edges_p, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den > 0, out, np.inf)
