"""Secret key rates for Gaussian-modulated coherent states.

Reverse reconciliation against individual attacks, with variances in
shot-noise units (vacuum variance 1). In ``ideal`` mode Bob's detector is
perfect; in ``realistic`` mode his efficiency ``eta`` and electronic noise
``v_el`` are trusted, i.e. not attributed to the eavesdropper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgument, SingularInput
from .homodyne import NoiseCalibration

BOB_LOSS_DB = 2.4


@dataclass(frozen=True)
class ChannelParams:
    G: float
    epsilon_excess: float = 0.0

    def __post_init__(self):
        if not 0 < self.G <= 1:
            raise InvalidArgument("transmission G must lie in (0, 1]")
        if self.epsilon_excess < 0:
            raise InvalidArgument("excess noise must be non-negative")

    @property
    def chi_line(self):
        return (1 - self.G) / self.G + self.epsilon_excess


@dataclass(frozen=True)
class DetectionParams:
    eta: float = 10 ** (-BOB_LOSS_DB / 10)
    v_el: float = 0.01

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise InvalidArgument("eta must lie in (0, 1]")
        if self.v_el < 0:
            raise InvalidArgument("v_el must be non-negative")

    @property
    def chi_hom(self):
        return (1 - self.eta) / self.eta + self.v_el / self.eta

    @classmethod
    def from_calibration(cls, cal, lo_photons, eta=10 ** (-BOB_LOSS_DB / 10)):
        """Electronic noise at the operating LO, converted to shot units."""
        return cls(eta=eta, v_el=cal.crossover_photons / lo_photons)

    @classmethod
    def from_total_noise_std(cls, total_std, eta=10 ** (-BOB_LOSS_DB / 10)):
        """Trusted detector noise reproducing a measured total std.

        ``total_std`` is in the vacuum-std-0.707 convention; everything
        above the shot noise is lumped into ``v_el``.
        """
        return cls(eta=eta, v_el=max(0.0, 2 * total_std ** 2 - 1))


@dataclass(frozen=True)
class KeyRateParams:
    V_A: float
    mode: str = "realistic"
    reconciliation_efficiency: float = 1.0

    def __post_init__(self):
        if self.V_A < 0:
            raise InvalidArgument("V_A must be non-negative")
        if self.mode not in ("ideal", "realistic"):
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        if not 0 < self.reconciliation_efficiency <= 1:
            raise InvalidArgument("reconciliation efficiency must lie in (0, 1]")

    @property
    def V(self):
        return self.V_A + 1


@dataclass(frozen=True)
class KeyRate:
    I_AB: float
    I_BE: float
    delta_I: float


def channel_from_loss(loss_db, epsilon_excess=0.0):
    if loss_db < 0:
        raise InvalidArgument("loss must be non-negative")
    return ChannelParams(10 ** (-loss_db / 10), epsilon_excess)


def as_untrusted(ch, det):
    """Channel that lumps Bob's loss and noise into the line.

    Feeding it to ``ideal`` mode attributes the detector imperfections to
    the eavesdropper while keeping Bob's conditional variance unchanged.
    """
    g = ch.G * det.eta
    return ChannelParams(g, ch.epsilon_excess + det.v_el / g)


def mutual_informations(ch, det, kp):
    """Return ``(I_AB, I_BE)`` in bits per pulse."""
    V, G, chi = kp.V, ch.G, ch.chi_line
    if kp.mode == "ideal":
        i_ab = 0.5 * math.log2((V + chi) / (1 + chi))
        i_be = 0.5 * math.log2(G ** 2 * (V + chi) * (1 / V + chi))
        return i_ab, i_be
    if not math.isfinite(V):
        raise SingularInput("modulation variance must be finite")
    eta, chi_hom = det.eta, det.chi_hom
    v_b = eta * (G * (V + chi) + chi_hom)
    v_b_a = eta * (G * (1 + chi) + chi_hom)
    v_b_e = eta * (1 / (G * (1 / V + chi)) + chi_hom)
    return 0.5 * math.log2(v_b / v_b_a), 0.5 * math.log2(v_b / v_b_e)


def key_rate_details(ch, det, kp):
    i_ab, i_be = mutual_informations(ch, det, kp)
    rate = max(0.0, kp.reconciliation_efficiency * (i_ab - i_be))
    return KeyRate(i_ab, i_be, rate)


def key_rate_rr_individual(ch, det, kp):
    """Secret bits per pulse, clamped at zero."""
    return key_rate_details(ch, det, kp).delta_I


def bits_per_second(rate_bits_per_pulse, rep_rate_hz):
    if rate_bits_per_pulse < 0 or rep_rate_hz < 0:
        raise InvalidArgument("rate and repetition rate must be non-negative")
    return rate_bits_per_pulse * rep_rate_hz


def modulation_variance(max_photons, interpretation="mean"):
    """Alice's modulation variance for a quoted "maximal intensity".

    ``"mean"`` reads it as the mean photon number of the Gaussian ensemble
    (``V_A = 2 n``); ``"variance"`` as ``V_A = n``.
    """
    if interpretation == "mean":
        return 2.0 * max_photons
    if interpretation == "variance":
        return float(max_photons)
    raise InvalidArgument(f"unknown interpretation {interpretation!r}")


# Measured total std of Bob's homodyne noise, vacuum std = 0.707.
MEASURED_TOTAL_STD = 1.1


def rate_table(loss_db, max_photons, rep_rate_hz, cal=None, lo_photons=1e8,
               epsilon_excess=0.0, total_std=MEASURED_TOTAL_STD):
    """Rows for every (mode, V_A interpretation, detector-noise source).

    The detector noise is either the calibrated electronic noise at the
    operating LO or everything in excess of shot noise in the measured
    total noise.
    """
    cal = cal or NoiseCalibration()
    ch = channel_from_loss(loss_db, epsilon_excess)
    detectors = {
        "calibration": DetectionParams.from_calibration(cal, lo_photons),
        "measured_total": DetectionParams.from_total_noise_std(total_std),
    }
    rows = []
    for mode in ("realistic", "ideal"):
        for interp in ("mean", "variance"):
            for source, det in detectors.items():
                if mode == "ideal" and source != "calibration":
                    continue
                kp = KeyRateParams(modulation_variance(max_photons, interp), mode)
                r = key_rate_details(ch, det, kp)
                rows.append({
                    "loss_db": loss_db,
                    "mode": mode,
                    "va_interpretation": interp,
                    "v_el_source": source if mode == "realistic" else "none",
                    "V_A": kp.V_A,
                    "G": ch.G,
                    "chi_line": ch.chi_line,
                    "chi_hom": det.chi_hom if mode == "realistic" else 0.0,
                    "I_AB": r.I_AB,
                    "I_BE": r.I_BE,
                    "delta_I": r.delta_I,
                    "bits_per_second": bits_per_second(r.delta_I, rep_rate_hz),
                })
    return rows


def headline_rate(loss_db, max_photons, total_std=MEASURED_TOTAL_STD):
    """Realistic-mode rate with ``V_A = 2 n`` and the measured detector noise trusted."""
    ch = channel_from_loss(loss_db)
    det = DetectionParams.from_total_noise_std(total_std)
    kp = KeyRateParams(modulation_variance(max_photons, "mean"), "realistic")
    return key_rate_rr_individual(ch, det, kp)
