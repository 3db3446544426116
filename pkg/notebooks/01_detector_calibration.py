# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Detector noise calibration
#
# The homodyne output variance grows linearly with LO photon number once
# shot noise dominates the electronic floor. We simulate the variance at ten
# LO levels and recover the floor and the slope by weighted least squares.

# %%
import numpy as np

from cvpnp.homodyne import (NoiseCalibration, balance_epsilon_bound, epsilon_to_db,
                            fit_noise_curve, simulate_noise_curve)

cal = NoiseCalibration(v_electr=1e6, a=1.0)
lo = np.logspace(5, 8, 10)
points = simulate_noise_curve(cal, lo, 100_000, np.random.default_rng(1))
fit = fit_noise_curve(points)
print(f"v_electr = {fit.v_electr:.4g}   a = {fit.a:.4f}   R^2 = {fit.r_squared:.6f}")
print(f"crossover at {fit.crossover_photons:.3g} LO photons")

# %% [markdown]
# Share of the noise that is electronic at a few operating points.

# %%
for n in (1e6, 1e7, 1e8):
    print(f"LO {n:.0e}: electronic fraction {cal.electronic_fraction(n):.3f}")

# %% [markdown]
# How well the two photodiodes must be balanced so that LO intensity noise
# stays below one vacuum standard deviation.

# %%
for n in (1e7, 1e8):
    eps = balance_epsilon_bound(n)
    print(f"LO {n:.0e}: |epsilon| < {eps:.3g}  ({epsilon_to_db(eps):.2g} dB)")
