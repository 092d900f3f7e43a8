"""Monte Carlo detection of individual photons.

Every photon ``j`` of a run consumes exactly one uniform from the momentum
stream and one from the polarization stream, both addressed by draw index
``j`` in a counter-based Philox generator.  A run can therefore be cut into
chunks and spread over any number of threads without changing a single
detection, and the per-chunk histograms merge by plain integer addition.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import core
from .core import ExperimentConfig, MomentumGrid
from .errors import ConfigError, IncompatibleBinningError, InsufficientCoverageError

MOMENTUM_STREAM = 0
POLARIZATION_STREAM = 1

#: photons per work unit; fixed so that chunking never depends on thread count
CHUNK_SIZE = 2**20

#: maximum probability mass allowed outside a full-screen grid
MAX_TAIL_MASS = 1e-3

MODELS = ("coherent", "mixture")


def rng_stream(seed: int, stream_index: int, draw_index: int = 0) -> np.random.Generator:
    """Generator positioned at ``draw_index`` of stream ``(seed, stream_index)``.

    Draws are 64-bit words of a Philox4x64 counter stream; each call to
    ``Generator.random`` consumes one word per double.
    """
    if draw_index < 0:
        raise ValueError("draw_index must be nonnegative")
    key = np.random.SeedSequence(seed, spawn_key=(stream_index,)).generate_state(2, np.uint64)
    bitgen = np.random.Philox(key=key)
    block, rem = divmod(draw_index, 4)
    if block:
        bitgen.advance(block)
    gen = np.random.Generator(bitgen)
    if rem:
        gen.random(rem)
    return gen


@dataclass(frozen=True)
class CdfTable:
    """Tabulated cumulative distribution of the detection momentum."""

    grid: MomentumGrid
    cdf: np.ndarray
    covered_mass: float

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    def __call__(self, p):
        return np.interp(p, self.points, self.cdf)


def build_cdf(
    config: ExperimentConfig,
    aperture: tuple[float, float] | None = None,
    n_points: int | None = None,
) -> CdfTable:
    """Tabulate the CDF of :func:`~whichway.core.detection_density`.

    Parameters
    ----------
    config : ExperimentConfig
    aperture : (float, float), optional
        Momentum range of a finite screen.  The table then describes the
        distribution conditioned on hitting the screen.  Without an aperture
        the table spans ``config.p_grid`` and must hold all but
        ``MAX_TAIL_MASS`` of the full-line probability.
    n_points : int, optional
        Grid size; defaults to ``config.p_grid.n_points`` for the full screen
        and to :func:`~whichway.core.grid_points_for` for an aperture.

    Raises
    ------
    InsufficientCoverageError
        If no aperture is given and the grid misses more than
        ``MAX_TAIL_MASS`` of the detection probability.
    """
    if aperture is None:
        lo, hi = config.p_grid.p_min, config.p_grid.p_max
        n = n_points or config.p_grid.n_points
    else:
        lo, hi = float(aperture[0]), float(aperture[1])
        n = n_points or core.grid_points_for(hi - lo, config.slit_separation, config.hbar)
    grid = MomentumGrid(lo, hi, n)
    p = grid.points
    cum = cumulative_trapezoid(core.detection_density(p, config), p, initial=0.0)
    mass = float(cum[-1])
    if aperture is None and 1.0 - mass > MAX_TAIL_MASS:
        raise InsufficientCoverageError(
            f"grid [{grid.p_min}, {grid.p_max}] misses {1.0 - mass:.3g} of the detection probability"
        )
    if not mass > 0:
        raise InsufficientCoverageError("no detection probability inside the grid")
    cdf = cum / mass
    cdf[-1] = 1.0
    return CdfTable(grid, cdf, mass)


def momentum_from_uniform(table: CdfTable, u):
    """Inverse-transform map from uniforms to momenta, linear within grid cells."""
    return np.interp(u, table.cdf, table.points)


def sample_momentum(table: CdfTable, rng: np.random.Generator, size=None):
    return momentum_from_uniform(table, rng.random(size))


def polarization_from_uniform(p, config: ExperimentConfig, u):
    """Map uniforms to polarization outcomes (``core.H`` or ``core.V``)."""
    if config.theta == 0.0:
        # conditional_V_probability still raises at an exact dark fringe
        core.conditional_V_probability(p, config)
        return np.zeros(np.shape(u), dtype=np.int8)
    p_v = core.conditional_V_probability(p, config)
    return (np.asarray(u) < p_v).astype(np.int8)


def sample_polarization(p, config: ExperimentConfig, rng: np.random.Generator):
    """Bernoulli polarization outcome with success probability ``P(V|p)``."""
    return polarization_from_uniform(p, config, rng.random(np.shape(p)))


@dataclass(frozen=True)
class BinnedCounts:
    """Histogram of detections over fringe-phase bins.

    ``bin_edges`` are in fringe phase ``x = d p / hbar``.  Bins are closed on
    the right: an event exactly on an interior edge belongs to the bin on its
    left.
    """

    bin_edges: np.ndarray
    n_total: np.ndarray
    n_V: np.ndarray
    seeds: tuple[int, ...]
    n_photons: int
    config: ExperimentConfig
    model: str = "coherent"

    def __post_init__(self):
        if len(self.bin_edges) != len(self.n_total) + 1 or len(self.n_total) != len(self.n_V):
            raise ValueError("inconsistent bin array lengths")
        if np.any(self.n_V > self.n_total) or np.any(self.n_V < 0):
            raise ValueError("need 0 <= n_V <= n_total in every bin")
        if int(self.n_total.sum()) != self.n_photons:
            raise ValueError("bin totals do not add up to n_photons")

    @property
    def theta(self) -> float:
        return self.config.theta

    @property
    def seed(self):
        return self.seeds[0] if len(self.seeds) == 1 else self.seeds

    @property
    def n_bins(self) -> int:
        return len(self.n_total)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @classmethod
    def empty(cls, bin_edges, config: ExperimentConfig, model: str = "coherent") -> "BinnedCounts":
        edges = np.asarray(bin_edges, dtype=float)
        zeros = np.zeros(len(edges) - 1, dtype=np.int64)
        return cls(edges, zeros, zeros.copy(), (), 0, config, model)

    def __eq__(self, other):
        if not isinstance(other, BinnedCounts):
            return NotImplemented
        return (
            np.array_equal(self.bin_edges, other.bin_edges)
            and np.array_equal(self.n_total, other.n_total)
            and np.array_equal(self.n_V, other.n_V)
            and self.seeds == other.seeds
            and self.n_photons == other.n_photons
            and self.config == other.config
            and self.model == other.model
        )

    __hash__ = None


def merge_counts(a: BinnedCounts, b: BinnedCounts) -> BinnedCounts:
    """Add two histograms bin by bin.

    Raises
    ------
    IncompatibleBinningError
        If the bin edges, rotation angle, configuration or model differ.
    """
    if not np.array_equal(a.bin_edges, b.bin_edges):
        raise IncompatibleBinningError("bin edges differ")
    if a.theta != b.theta:
        raise IncompatibleBinningError(f"theta differs: {a.theta} vs {b.theta}")
    if a.config != b.config or a.model != b.model:
        raise IncompatibleBinningError("experiment configuration or model differs")
    return BinnedCounts(
        a.bin_edges,
        a.n_total + b.n_total,
        a.n_V + b.n_V,
        tuple(sorted(a.seeds + b.seeds)),
        a.n_photons + b.n_photons,
        a.config,
        a.model,
    )


def assign_bins(x, edges) -> np.ndarray:
    """Right-closed bin index of each fringe phase, clipped to the outer bins."""
    idx = np.searchsorted(edges, x, side="left") - 1
    return np.clip(idx, 0, len(edges) - 2)


def _run_chunk(table, config, model, edges, seed, start, stop):
    n = stop - start
    u_mom = rng_stream(seed, MOMENTUM_STREAM, start).random(n)
    u_pol = rng_stream(seed, POLARIZATION_STREAM, start).random(n)
    p = momentum_from_uniform(table, u_mom)
    if model == "coherent":
        pol = polarization_from_uniform(p, config, u_pol)
    else:
        pol = (u_pol < np.sin(config.theta) ** 2).astype(np.int8)
    idx = assign_bins(core.fringe_phase(p, config), edges)
    n_bins = len(edges) - 1
    n_total = np.bincount(idx, minlength=n_bins)
    n_v = np.bincount(idx, weights=pol, minlength=n_bins).astype(np.int64)
    return n_total, n_v


def run_experiment(
    config: ExperimentConfig,
    n_photons: int,
    seed: int,
    n_bins: int = 100,
    window: tuple[float, float] = (-np.pi, np.pi),
    *,
    model: str = "coherent",
    workers: int = 1,
    n_points: int | None = None,
) -> BinnedCounts:
    """Simulate ``n_photons`` detections on a screen spanning ``window``.

    The screen covers the fringe-phase interval ``window`` and is cut into
    ``n_bins`` equal bins; photons are drawn from the detection density
    restricted to that interval.  With ``model="mixture"`` the photons
    instead follow the undisturbed pattern and are vertical with the
    position-independent probability ``sin^2 theta`` of a random rotation by
    ``+theta`` or ``-theta``.

    The result depends only on ``(config, n_photons, seed, n_bins, window,
    model)``; ``workers`` changes the wall time, not the counts.
    """
    if int(n_photons) != n_photons or n_photons < 1:
        raise ConfigError("n_photons must be a positive integer")
    if int(n_bins) != n_bins or n_bins < 2:
        raise ConfigError("n_bins must be an integer >= 2")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; expected one of {MODELS}")
    lo, hi = float(window[0]), float(window[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ConfigError(f"invalid window {window!r}")
    edges = np.linspace(lo, hi, int(n_bins) + 1)
    aperture = tuple(core.momentum_from_phase([lo, hi], config))
    shape_config = config.with_theta(0.0) if model == "mixture" else config
    table = build_cdf(shape_config, aperture=aperture, n_points=n_points)

    starts = range(0, int(n_photons), CHUNK_SIZE)
    jobs = [(s, min(s + CHUNK_SIZE, int(n_photons))) for s in starts]

    def work(job):
        return _run_chunk(table, config, model, edges, seed, *job)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(job) for job in jobs]
    n_total = np.sum([t for t, _ in parts], axis=0).astype(np.int64)
    n_v = np.sum([v for _, v in parts], axis=0).astype(np.int64)
    return BinnedCounts(edges, n_total, n_v, (int(seed),), int(n_photons), config, model)
