"""Polarization-marked double slit: analytic predictions and photon-counting simulation."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ExperimentConfig,
    MomentumGrid,
    conditional_V_probability,
    detection_density,
    path_fluctuation_analytic,
    path_fluctuation_at_phase,
    prepare_post_slit_state,
    screen_amplitude,
)
from .sampler import BinnedCounts, merge_counts, run_experiment  # noqa: E402
from .analysis import estimate_path_fluctuation, goodness_of_fit, theta_sweep, weak_value_path  # noqa: E402
