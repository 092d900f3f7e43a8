"""
Shrinking the rotation angle
============================

The bin-wise limit of the estimator, P(V)/sin^2(theta) averaged over the
bin, tends to tan^2(x/2) as theta goes to zero.  At fixed photon number the
statistical error grows at the same time, because fewer photons flip.
"""

# %%
import matplotlib.pyplot as plt
import numpy as np

from _common import save
from whichway import analysis
from whichway.core import ExperimentConfig
from whichway.sampler import BinnedCounts

thetas = [0.2, 0.05, 0.01]
base = ExperimentConfig()

# %% [markdown]
# First the noise-free part: compare the estimator's expectation with the
# analytic bin average.

# %%
edges = np.linspace(-np.pi, np.pi, 101)
centers = 0.5 * (edges[1:] + edges[:-1])
keep = np.abs(centers) <= 2 * np.pi / 3
fig, ax = plt.subplots(figsize=(7, 4))
for theta in thetas:
    cfg = base.with_theta(theta)
    shell = BinnedCounts(edges, np.ones(100, dtype=np.int64), np.zeros(100, dtype=np.int64), (0,), 100, cfg)
    _, q, eps2 = analysis.bin_references(shell)
    bias = np.abs(q / np.sin(theta) ** 2 - eps2) / np.maximum(eps2, analysis.RELATIVE_ERROR_FLOOR)
    print(f"theta = {theta}: median relative bias {np.median(bias[keep]):.2e}")
    ax.semilogy(centers, np.maximum(bias, 1e-12), label=f"theta = {theta}")
ax.set_xlabel("fringe phase x")
ax.set_ylabel("relative bias of the limit")
ax.legend()
save(fig, "03_bias.png")

# %% [markdown]
# Then the full Monte Carlo sweep at 10^7 photons per angle.  Here shot
# noise dominates: at theta = 0.01 a typical bin holds only about ten
# vertical photons, so the median relative error grows as theta shrinks.

# %%
rows = analysis.theta_sweep(base, thetas, 10**7, seed=4, n_bins=100)
summary = analysis.sweep_summary(rows)
for theta, med in zip(summary["thetas"], summary["median_relative_error"]):
    print(f"theta = {theta}: median relative error {med:.3f}")

fig, ax = plt.subplots(figsize=(7, 4))
for theta in thetas:
    sub = [r for r in rows if r.theta == theta]
    ax.plot([r.bin_center for r in sub], [r.eps2_hat for r in sub], ".", ms=3, label=f"theta = {theta}")
ax.plot(centers, [r.analytic for r in rows[:100]], "k-", lw=1, label="analytic")
ax.set_ylim(0, 6)
ax.set_xlabel("fringe phase x")
ax.legend()
save(fig, "03_theta_sweep.png")
