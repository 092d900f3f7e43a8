"""
Weak values of the path projectors
==================================

Post-selecting on a screen momentum p, the weak values of the two slit
projectors are w1 = 1/2 + (i/2) tan(x/2) and w2 = 1 - w1.  Their real parts
stay at one half, and |w1 - w2|^2 reproduces the path fluctuation.
"""

# %%
import matplotlib.pyplot as plt
import numpy as np

from _common import save
from whichway import analysis, core
from whichway.core import ExperimentConfig

config = ExperimentConfig()
x = np.linspace(-0.95 * np.pi, 0.95 * np.pi, 801)
p = core.momentum_from_phase(x, config)
w1, w2 = analysis.weak_value_path(p, config)

print("at the central maximum:", analysis.weak_value_path(0.0, config))
print("max |w1 + w2 - 1|:", np.max(np.abs(w1 + w2 - 1)))
print("max relative gap to eps^2:",
      np.max(np.abs(np.abs(w1 - w2) ** 2 - core.path_fluctuation_at_phase(x)) / np.maximum(core.path_fluctuation_at_phase(x), 1e-300)))

# %%
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(x, w1.real, label="Re w1")
ax.plot(x, w1.imag, label="Im w1")
ax.plot(x, w2.imag, label="Im w2")
ax.set_ylim(-4, 4)
ax.set_xlabel("fringe phase x")
ax.legend()
save(fig, "05_weak_values.png")

# %% [markdown]
# The dark fringe itself is excluded: the overlap with the post-selected
# state vanishes there and the weak value is undefined.

# %%
try:
    analysis.weak_value_path(np.pi, config)
except Exception as exc:
    print(type(exc).__name__, exc)
