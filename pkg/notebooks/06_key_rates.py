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
# # Repetition rate and secret key rate
#
# Only one pulse train may be in the fibre at a time, or Rayleigh
# backscatter from the bright outbound pulses leaks into the returning
# signal. That caps the repetition rate on long spools.

# %%
from cvpnp import keyrate as K
from cvpnp import link as L

for km in (0, 1, 14, 25):
    print(f"{km:3d} km: max {L.max_repetition_rate(km):9.1f} Hz")

slow = L.lab_link(14.0)
for rate in (6.7e3, 20e3, 50e3):
    lk = slow.replace(single_train_enforced=False, rep_rate=rate)
    print(f"14 km at {rate:7.0f} Hz: vacuum variance {L.detection_variance(lk, 0):.3f}")

# %% [markdown]
# Key rates for the two operating points. The headline row trusts the
# whole measured excess noise as detector noise; the table lists the other
# readings for comparison.

# %%
for loss, n, rate in ((0.88, 30, 50e3), (3.1, 20, 6.7e3)):
    r = K.headline_rate(loss, n)
    print(f"{loss} dB: {r:.3f} bit/pulse, {K.bits_per_second(r, rate) / 1e3:.2f} kbit/s")
    for row in K.rate_table(loss, n, rate):
        print(f"   {row['mode']:9s} {row['va_interpretation']:8s} {row['v_el_source']:14s} {row['delta_I']:.3f}")
