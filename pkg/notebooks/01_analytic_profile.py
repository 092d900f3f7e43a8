"""
Analytic path-fluctuation profile
=================================

A small polarization rotation in one slit marks the path weakly.  Detected
at screen momentum p, the photon carries a vertical component whose
probability, divided by the rotation strength, approaches the normalized
path fluctuation eps^2(x) = tan^2(x/2), with fringe phase x = d p / hbar.
"""

# %%
import matplotlib.pyplot as plt
import numpy as np

from _common import save
from whichway import analysis, core
from whichway.core import ExperimentConfig

config = ExperimentConfig(theta=0.05)
prof = analysis.analytic_profile(config, (-np.pi, np.pi), n_points=2001, ceiling=1e3)

# %% [markdown]
# The fluctuation vanishes at the central maximum, equals one where the
# fringe factor 1 + cos x passes through its mean, reaches three at 2pi/3
# and diverges at the dark fringes.

# %%
for x in (0.0, np.pi / 2, 2 * np.pi / 3):
    print(f"x = {x:.4f}  eps^2 = {core.path_fluctuation_at_phase(x):.12f}")
print("flag at x = pi:", prof.flag[-1])
print("mean of 1 + cos x:", np.trapezoid(prof.pattern, prof.x) / (2 * np.pi))

# %%
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(prof.x, prof.pattern, "k--", lw=1, label="interference pattern 1 + cos x")
ax.plot(prof.x, prof.eps2, "C3", label=r"path fluctuation $\tan^2(x/2)$")
ax.set_ylim(0, 4)
ax.set_xlabel("fringe phase x = d p / hbar")
ax.legend(loc="upper center")
save(fig, "01_analytic_profile.png")

# %% [markdown]
# At finite angle the conditional vertical probability saturates at one
# near the minima instead of diverging.  Dividing it by sin^2(theta) shows
# how quickly the ratio follows tan^2(x/2) as theta shrinks.

# %%
fig, ax = plt.subplots(figsize=(7, 4))
for theta in (0.5, 0.2, 0.05):
    ratio = analysis.analytic_profile(config.with_theta(theta), n_points=2001).p_v / np.sin(theta) ** 2
    ax.plot(prof.x, ratio, label=f"P(V|x) / sin^2, theta = {theta}")
ax.plot(prof.x, prof.eps2, "k:", label="limit")
ax.set_ylim(0, 6)
ax.set_xlabel("fringe phase x")
ax.legend()
save(fig, "01_finite_angle.png")
