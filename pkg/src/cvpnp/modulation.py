"""Alice's dual-electrode modulator and its imperfect drive gate.

The modulator is a push-pull interferometer: each electrode adds a phase
``pi * v / v_pi`` to one arm. The drive is applied through a ~70 ns gate
that is flat in the middle and has raised-cosine edges, so a pulse that
slips off the gate centre sees a partially undriven (fully transmitting)
modulator. That leakage matters most when the requested attenuation is
strong, which is why small states are the hardest to prepare accurately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .analysis import comparison_error
from .errors import InvalidArgument, UnreachableSetpoint


@dataclass(frozen=True)
class ModulatorSpec:
    v_pi: float = 4.0
    gate_duration: float = 70e-9
    edge_time: float = 10e-9
    timing_offset_sigma: float = 0.0

    def __post_init__(self):
        if not (self.v_pi > 0 and self.gate_duration > 0):
            raise InvalidArgument("v_pi and gate_duration must be positive")
        if not 0 <= self.edge_time <= self.gate_duration / 2:
            raise InvalidArgument("edge_time must lie in [0, gate_duration/2]")
        if self.timing_offset_sigma < 0:
            raise InvalidArgument("timing_offset_sigma must be non-negative")


@dataclass(frozen=True)
class DriveCommand:
    v1: float
    v2: float
    target_phase: float = 0.0
    target_photons: float = 0.0

    def __post_init__(self):
        if self.target_photons < 0:
            raise InvalidArgument("target_photons must be non-negative")


def dual_drive_transfer(spec, v1, v2):
    """Complex field transmission ``(exp(i pi v1/v_pi) + exp(i pi v2/v_pi)) / 2``."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    t = 0.5 * (np.exp(1j * np.pi * v1 / spec.v_pi) + np.exp(1j * np.pi * v2 / spec.v_pi))
    return complex(t) if t.ndim == 0 else t


def solve_drive(spec, target_photons, target_phase, input_photons):
    """Electrode voltages that turn ``input_photons`` into the requested state.

    The difference ``v1 - v2`` sets the amplitude and the sum ``v1 + v2`` the
    phase; the amplitude branch is taken in ``[0, v_pi]``.
    """
    if target_photons < 0:
        raise InvalidArgument("target_photons must be non-negative")
    if input_photons <= 0 or target_photons > input_photons * (1 + 1e-12):
        raise UnreachableSetpoint(
            f"{target_photons:g} photons requested, {input_photons:g} available"
        )
    ratio = min(1.0, math.sqrt(target_photons / input_photons))
    half_diff = math.acos(ratio)
    half_sum = math.remainder(target_phase, 2 * math.pi)
    scale = spec.v_pi / math.pi
    return DriveCommand(
        v1=scale * (half_sum + half_diff),
        v2=scale * (half_sum - half_diff),
        target_phase=target_phase,
        target_photons=target_photons,
    )


def gate_shape(spec, t):
    """Gate weight at time ``t`` from the gate centre (1 on the flat top)."""
    t = np.abs(np.asarray(t, dtype=float))
    half = spec.gate_duration / 2
    flat = half - spec.edge_time
    w = np.where(t <= flat, 1.0, 0.0)
    if spec.edge_time > 0:
        on_edge = (t > flat) & (t < half)
        u = (t - flat) / spec.edge_time
        w = np.where(on_edge, 0.5 * (1 + np.cos(np.pi * u)), w)
    return w


def _gate_integral(spec, x):
    # odd antiderivative of gate_shape, zero at the gate centre
    x = np.asarray(x, dtype=float)
    s, a = np.sign(x), np.abs(x)
    half = spec.gate_duration / 2
    e = spec.edge_time
    flat = half - e
    if e == 0:
        return s * np.minimum(a, half)
    u = np.clip(a - flat, 0.0, e)
    edge = 0.5 * (u + e / np.pi * np.sin(np.pi * u / e))
    return s * (np.minimum(a, flat) + edge)


def gate_overlap_factor(spec, pulse_center, gate_center, pulse_duration):
    """Mean gate weight seen by a rectangular pulse, normalized to centring.

    Symmetric in the sign of the offset and non-increasing in its size.
    """
    if not pulse_duration > 0:
        raise InvalidArgument("pulse_duration must be positive")
    half = pulse_duration / 2

    def mean_weight(offset):
        return (_gate_integral(spec, offset + half) - _gate_integral(spec, offset - half)) / pulse_duration

    offset = np.asarray(pulse_center, dtype=float) - gate_center
    f = mean_weight(offset) / mean_weight(0.0)
    return float(f) if np.ndim(f) == 0 else f


def effective_transmission(spec, v1, v2, offsets, pulse_duration=50e-9, steps=500):
    """Field transmission of the pulse mode for each timing offset.

    Every slice of the pulse sees the drive scaled by the local gate weight;
    the homodyne mode picks up the average of the slice transmissions.
    """
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    dt = pulse_duration / steps
    grid = (np.arange(steps) + 0.5) * dt - pulse_duration / 2
    w = gate_shape(spec, offsets[:, None] + grid[None, :])
    return dual_drive_transfer(spec, w * v1, w * v2).mean(axis=1)


def modulate(spec, cmd, pulse, rng, size=None):
    """Apply Alice's modulation to ``pulse``.

    Returns one pulse, or a list of ``size`` pulses each with its own
    Gaussian gate-timing offset.
    """
    if cmd.target_photons > pulse.photons * (1 + 1e-12):
        raise UnreachableSetpoint(
            f"{cmd.target_photons:g} photons requested, {pulse.photons:g} available"
        )
    n = 1 if size is None else size
    if spec.timing_offset_sigma > 0:
        offsets = rng.normal(0.0, spec.timing_offset_sigma, n)
        t = effective_transmission(spec, cmd.v1, cmd.v2, offsets, pulse.duration)
    else:
        t = np.full(n, dual_drive_transfer(spec, cmd.v1, cmd.v2))
    out = [pulse.replace(amplitude=pulse.amplitude * complex(ti)) for ti in t]
    return out[0] if size is None else out


def preparation_error(spec, targets, input_photons, rng, trials=1000, phase=0.0):
    """Percent error between requested and delivered photon numbers.

    For each target the delivered photon number is taken from the mean
    field over ``trials`` jittered pulses, as a homodyne estimate would see
    it. The same timing offsets are reused for every target.
    """
    offsets = rng.normal(0.0, spec.timing_offset_sigma, trials) if spec.timing_offset_sigma > 0 else np.zeros(1)
    errors = []
    for n in targets:
        cmd = solve_drive(spec, n, phase, input_photons)
        t = effective_transmission(spec, cmd.v1, cmd.v2, offsets)
        delivered = abs(t.mean()) ** 2 * input_photons
        errors.append(comparison_error(n, delivered))
    return np.array(errors)


def calibrate_timing_jitter(spec, target_photons, input_photons, error_percent, seed=0,
                            trials=1000, sigma_max=30e-9):
    """Gate jitter that makes ``target_photons`` come out ``error_percent`` off."""

    def mismatch(sigma):
        trial_spec = ModulatorSpec(spec.v_pi, spec.gate_duration, spec.edge_time, sigma)
        rng = np.random.default_rng(seed)
        return preparation_error(trial_spec, [target_photons], input_photons, rng, trials)[0] - error_percent

    sigma = brentq(mismatch, 1e-12, sigma_max, xtol=1e-13)
    return ModulatorSpec(spec.v_pi, spec.gate_duration, spec.edge_time, sigma)
