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
# # Polarization compensation by the Faraday mirror
#
# Whatever unitary the fibre applies, the round trip through it and a
# Faraday mirror is the fixed matrix M up to a global phase. An ordinary
# mirror gives no such guarantee.

# %%
import numpy as np

from cvpnp import link as L
from cvpnp import optics

rng = np.random.default_rng(0)
dev = [np.abs(optics.faraday_round_trip(j) - np.linalg.det(j) * optics.FARADAY_MIRROR).max()
       for j in (optics.random_unitary(rng) for _ in range(1000))]
print(f"largest deviation over 1000 fibres: {max(dev):.2e}")

# %% [markdown]
# End to end: fitted amplitude of a 4-photon state for a few frozen fibres,
# with each kind of mirror.

# %%
base = L.lab_link(0.02)
for k in range(4):
    j = optics.random_unitary(np.random.default_rng(100 + k))
    row = []
    for mirror in ("faraday", "ordinary"):
        recs = L.run_phase_sweep(base.replace(frozen_jones=j, mirror=mirror), [4.0], 2000, seed=k)[0]
        row.append(L.fit_sweep(recs).amplitude)
    print(f"fibre {k}: faraday A = {row[0]:.3f}   ordinary A = {row[1]:.3f}")
print(f"expected sqrt(8) = {np.sqrt(8):.3f}")
