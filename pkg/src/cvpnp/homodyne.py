"""Pulsed balanced homodyne detector.

Conventions: normalized quadratures have vacuum variance 1/2 (standard
deviation 0.707), so a coherent state of ``n`` photons measured in phase
with the LO has mean ``sqrt(2 n)``. Raw detector units are scaled so that
the shot-noise variance is ``a * n_lo``; with ``a = 4`` they coincide with
the photocurrent difference ``2 q sqrt(I_LO)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, InvalidArgument, NoReference

VACUUM_VARIANCE = 0.5


@dataclass(frozen=True)
class BalanceState:
    """Splitter imbalance: transmission is ``1/2 + epsilon``.

    ``pol_sensitivity`` converts a change of input polarization (Jones
    vector distance from the stabilized state) into extra imbalance.
    """

    epsilon: float = 0.0
    trim_loss_db: float = 0.0
    pol_sensitivity: float = 0.0

    def __post_init__(self):
        if not abs(self.epsilon) < 0.5:
            raise InvalidArgument("|epsilon| must be below 1/2")

    def drifted(self, pol_distance):
        return BalanceState(self.epsilon + self.pol_sensitivity * pol_distance,
                            self.trim_loss_db, self.pol_sensitivity)


@dataclass(frozen=True)
class NoiseCalibration:
    """Detector noise ``V = v_electr + a * I_LO`` in raw units."""

    v_electr: float = 1e6
    a: float = 1.0
    residuals: np.ndarray | None = field(default=None, compare=False, repr=False)
    r_squared: float = float("nan")

    def __post_init__(self):
        if self.v_electr < 0 or not self.a > 0:
            raise InvalidArgument("need v_electr >= 0 and a > 0")

    @property
    def crossover_photons(self):
        return self.v_electr / self.a

    def variance(self, lo_photons):
        return self.v_electr + self.a * np.asarray(lo_photons, dtype=float)

    def electronic_fraction(self, lo_photons):
        """Electronic noise relative to shot noise at ``lo_photons``."""
        return self.crossover_photons / lo_photons


@dataclass(frozen=True, eq=False)
class HomodyneSample:
    raw: np.ndarray
    normalized: np.ndarray
    lo_photons: float


def balance_epsilon_bound(n_lo):
    """Largest imbalance whose LO offset stays below one vacuum std."""
    if not n_lo > 0:
        raise InvalidArgument("LO photon number must be positive")
    return 1 / (2 * math.sqrt(2 * n_lo))


def epsilon_to_db(epsilon):
    """Deviation of the splitter ratio from -3.0103 dB, in dB."""
    if not abs(epsilon) < 0.5:
        raise InvalidArgument("|epsilon| must be below 1/2")
    return 10 * math.log10(0.5 + epsilon) - 10 * math.log10(0.5)


def _raw_gain(cal, lo_photons):
    return math.sqrt(2 * cal.a * lo_photons)


def expected_moments(signal, lo, bal, cal, extra_noise_var=0.0, lo_reference=None,
                     signal_gain=1.0):
    """Mean and variance of the normalized outcome.

    ``lo_reference`` is the LO photon number the detector was calibrated
    at; it defaults to the actual LO, in which case drifts of the laser
    power are normalized away. ``signal_gain`` (scalar or array) multiplies
    the signal field shot by shot and yields one mean per entry.
    """
    n_lo = lo.photons
    if n_lo <= 0:
        raise NoReference("homodyne detection needs LO photons")
    n_ref = n_lo if lo_reference is None else lo_reference
    scale = math.sqrt(n_lo / n_ref)
    # projection of the signal field on the LO mode, LO phase as reference
    overlap = np.vdot(lo.field / math.sqrt(n_lo), signal.field)
    gain = np.asarray(signal_gain, dtype=complex)
    mean = scale * (math.sqrt(2) * (gain * overlap).real + 2 * bal.epsilon * math.sqrt(2 * n_lo))
    var = (scale ** 2 * VACUUM_VARIANCE
           + VACUUM_VARIANCE * cal.crossover_photons / n_ref
           + extra_noise_var)
    return (float(mean) if mean.ndim == 0 else mean), float(var)


def measure(signal, lo, bal, cal, extra_noise_var, rng, size=1, lo_reference=None,
            signal_gain=1.0):
    """Draw ``size`` homodyne outcomes for a signal pulse against ``lo``.

    The detected quadrature is the signal component in phase with the LO.
    A nonzero ``bal.epsilon`` adds the LO's own offset ``2 eps sqrt(2 n_lo)``.
    Electronic noise is additive in raw units, so its normalized variance
    falls as ``1 / n_lo``.
    """
    mean, var = expected_moments(signal, lo, bal, cal, extra_noise_var, lo_reference,
                                 signal_gain)
    normalized = rng.normal(mean, math.sqrt(var), size)
    n_ref = lo.photons if lo_reference is None else lo_reference
    return HomodyneSample(normalized * _raw_gain(cal, n_ref), normalized, lo.photons)


def raw_vacuum_samples(cal, lo_photons, size, rng):
    """Raw detector outputs with no signal: shot noise plus electronics."""
    shot = rng.normal(0.0, math.sqrt(cal.a * lo_photons), size)
    return shot + rng.normal(0.0, math.sqrt(cal.v_electr), size)


def fit_noise_curve(points):
    """Fit ``V = v_electr + a * I_LO`` to ``(lo_photons, variance)`` pairs.

    Sample variances scatter in proportion to their size, so the fit is
    weighted by the inverse variance, first measured and then modelled.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise InsufficientData("noise fit needs at least 3 (lo_photons, variance) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 3:
        raise InsufficientData("noise fit needs at least 3 distinct LO intensities")
    if np.any(y <= 0):
        raise InsufficientData("variances must be positive")
    slope, intercept = np.polyfit(x, y, 1, w=1 / y)
    model = intercept + slope * x
    if np.all(model > 0):
        slope, intercept = np.polyfit(x, y, 1, w=1 / model)
    model = intercept + slope * x
    resid = y - model
    r2 = 1 - np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2)
    return NoiseCalibration(max(float(intercept), 0.0), float(slope), resid, float(r2))


def simulate_noise_curve(cal, lo_photons, samples, rng):
    """Sample variance of raw vacuum outputs at each LO intensity."""
    return [(float(n), float(raw_vacuum_samples(cal, n, samples, rng).var(ddof=1)))
            for n in lo_photons]


def write_calibration_csv(path, points, fit):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["lo_photons", "variance", "fit_v_electr", "fit_a"])
        for n, v in points:
            w.writerow([repr(n), repr(v), repr(fit.v_electr), repr(fit.a)])
