"""
Coherent rotation or random local rotations?
============================================

A classical alternative gives every photon the same chance sin^2(theta) to
be vertical, independent of where it lands.  The conditional chi-square
test on the V fraction per bin separates the two at a million photons.
"""

# %%
import matplotlib.pyplot as plt
import numpy as np
from scipy import stats

from _common import save
from whichway import analysis
from whichway.core import ExperimentConfig
from whichway.sampler import run_experiment

config = ExperimentConfig(theta=0.1)
coherent = run_experiment(config, 10**6, seed=2, n_bins=100)
mixture = run_experiment(config, 10**6, seed=2, n_bins=100, model="mixture")

for name, counts in (("coherent", coherent), ("mixture", mixture)):
    res = analysis.goodness_of_fit(counts)
    print(f"{name:9s} p_total = {res.p_total:.3g}  p_conditional = {res.p_conditional:.3g}")

# %%
fig, ax = plt.subplots(figsize=(7, 4))
for name, counts in (("coherent", coherent), ("mixture", mixture)):
    frac = np.where(counts.n_total > 0, counts.n_V / np.maximum(counts.n_total, 1), np.nan)
    ax.plot(counts.bin_centers, frac, ".", label=name)
ax.axhline(np.sin(0.1) ** 2, color="k", lw=0.8, ls=":")
ax.set_yscale("log")
ax.set_xlabel("fringe phase x")
ax.set_ylabel("vertical fraction")
ax.legend()
save(fig, "04_vertical_fraction.png")

# %% [markdown]
# Under the coherent model its own data should give uniformly distributed
# p-values.

# %%
pvals = [analysis.goodness_of_fit(run_experiment(config, 10**6, 100 + s, 100)).p_conditional for s in range(50)]
print("KS test of p-value uniformity:", stats.kstest(pvals, "uniform").pvalue)
