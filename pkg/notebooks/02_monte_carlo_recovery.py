"""
Recovering the profile from photon counts
=========================================

Photons are drawn one at a time from the detection density, each with an
H or V outcome.  Binning in fringe phase and dividing the vertical fraction
by sin^2(theta) gives an estimate of the path fluctuation with a Wilson
interval on every bin.
"""

# %%
import time

import matplotlib.pyplot as plt
import numpy as np

from _common import save
from whichway import analysis
from whichway.core import ExperimentConfig
from whichway.sampler import run_experiment

config = ExperimentConfig(theta=0.05)
start = time.perf_counter()
counts = run_experiment(config, 10**7, seed=1, n_bins=100)
est = analysis.estimate_path_fluctuation(counts, confidence=0.99)
print(f"10^7 photons in {time.perf_counter() - start:.1f} s, {counts.n_V.sum()} vertical")

# %%
x = np.array([e.bin_center for e in est])
hat = np.array([e.eps2_hat for e in est])
lo = np.array([e.ci_low for e in est])
hi = np.array([e.ci_high for e in est])
ref = np.array([e.analytic for e in est])

sel = ref <= 10
covered = (lo <= ref) & (ref <= hi)
print(f"bins with eps^2 <= 10: {sel.sum()}, covered by the 99% interval: {covered[sel].mean():.3f}")

# %%
fig, ax = plt.subplots(figsize=(7, 4))
ax.fill_between(x, lo, hi, color="C0", alpha=0.3, step="mid", label="99% Wilson interval")
ax.plot(x, hat, "C0.", ms=3, label="estimate")
ax.plot(x, ref, "k-", lw=1, label="bin-averaged tan^2(x/2)")
ax.set_ylim(0, 12)
ax.set_xlabel("fringe phase x")
ax.legend()
save(fig, "02_monte_carlo_recovery.png")

# %% [markdown]
# Near the minima the bins are almost empty and their intervals are wide;
# the estimator still does not extrapolate, it only reports the counts.
