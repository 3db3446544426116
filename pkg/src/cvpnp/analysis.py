"""Post-processing of phase sweeps and stability runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, InvalidArgument, ShapeError


@dataclass(frozen=True)
class CosineFit:
    """``m(phi) = amplitude * cos(phi - phase_offset) + offset``."""

    amplitude: float
    phase_offset: float
    offset: float
    rms_residual: float
    amplitude_stderr: float = float("nan")

    def __call__(self, phi):
        return self.amplitude * np.cos(np.asarray(phi) - self.phase_offset) + self.offset


def fit_cosine(phases, means, sigma=None):
    """Least-squares cosine fit in the linear basis (cos, sin, 1).

    If ``sigma`` (the standard error of each mean) is given, the standard
    error of the fitted amplitude is propagated from it.
    """
    phi = np.asarray(phases, dtype=float)
    y = np.asarray(means, dtype=float)
    if phi.shape != y.shape or phi.ndim != 1:
        raise ShapeError("phases and means must be 1-D arrays of equal length")
    if phi.size < 4:
        raise InsufficientData("cosine fit needs at least 4 points")
    wrapped = np.sort(np.mod(phi, 2 * np.pi))
    gaps = np.diff(np.concatenate([wrapped, [wrapped[0] + 2 * np.pi]]))
    if 2 * np.pi - gaps.max() <= np.pi:
        raise InsufficientData("phases must span more than pi")

    basis = np.column_stack([np.cos(phi), np.sin(phi), np.ones_like(phi)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    c, s, offset = coef
    amplitude = float(np.hypot(c, s))
    phase_offset = float(np.arctan2(s, c)) if amplitude > 0 else 0.0
    resid = y - basis @ coef
    stderr = float("nan")
    if sigma is not None:
        cov = np.linalg.inv(basis.T @ basis) * np.mean(np.square(sigma))
        if amplitude > 0:
            grad = np.array([c, s]) / amplitude
            stderr = float(np.sqrt(grad @ cov[:2, :2] @ grad))
        else:
            stderr = float(np.sqrt(cov[0, 0]))
    return CosineFit(amplitude, phase_offset, float(offset),
                     float(np.sqrt(np.mean(resid ** 2))), stderr)


def amplitude_from_photons(photons):
    return np.sqrt(2 * np.asarray(photons, dtype=float))


def photons_from_amplitude(amplitude):
    """Mean photon number of a coherent state from its quadrature amplitude.

    Quadratures use the convention where vacuum has standard deviation
    1/sqrt(2), so a state of n photons has amplitude sqrt(2 n).
    """
    if np.any(np.asarray(amplitude) < 0):
        raise InvalidArgument("amplitude must be non-negative")
    return np.asarray(amplitude, dtype=float) ** 2 / 2


def comparison_error(n1, n2):
    """Percent difference relative to the mean of the two photon numbers."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    total = n1 + n2
    if np.any(total <= 0):
        raise InvalidArgument("comparison error is undefined when both values are zero")
    err = 200 * np.abs(n1 - n2) / total
    return float(err) if err.ndim == 0 else err


@dataclass(frozen=True)
class ComparisonRow:
    n_standard: float
    n_homodyne: float

    @property
    def error_percent(self):
        return comparison_error(self.n_standard, self.n_homodyne)


# Photon numbers at Bob's 50/50 coupler: power-meter value, homodyne value, quoted error.
REFERENCE_20M = [
    (9.3, 9.1, 2.2), (8.77, 8.75, 0.2), (7.62, 7.65, 0.4), (6.0, 6.19, 3.1),
    (4.27, 4.44, 3.9), (2.52, 2.72, 7.6), (1.11, 1.3, 15.8), (0.28, 0.38, 30.3),
]
REFERENCE_14KM = [
    (2.2, 2.3, 4.4), (2.08, 2.21, 6.1), (1.8, 1.9, 5.4), (1.42, 1.6, 11.9),
    (1.01, 1.06, 4.8), (0.6, 0.69, 14.0), (0.26, 0.33, 23.7), (0.07, 0.11, 44.4),
]


def reproducibility(per_run_values):
    """Run-to-run spread of repeated measurements.

    ``per_run_values[r][k]`` is the value measured in run ``r`` for state
    ``k``. The sample standard deviation over runs is taken for every state
    and then averaged over states.
    """
    try:
        values = np.asarray(per_run_values, dtype=float)
    except ValueError as exc:
        raise ShapeError("all runs must cover the same states") from exc
    if values.ndim != 2:
        raise ShapeError("expected a (runs, states) array")
    if values.shape[0] < 2:
        raise InsufficientData("reproducibility needs at least two runs")
    return float(values.std(axis=0, ddof=1).mean())
