"""Pulses, Jones calculus and the passive components of the go-&-return link.

A pulse carries a complex amplitude (its modulus squared is the mean photon
number) and a unit Jones vector; the optical field is ``amplitude * polarization``.
Jones matrices are plain 2x2 complex ``numpy`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument

H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)

FARADAY_MIRROR = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
# Plain reflector, used to show what the link looks like without compensation.
ORDINARY_MIRROR = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Group delay of standard fibre, one way.
FIBER_DELAY_PER_KM = 5e-6

_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


@dataclass(frozen=True, eq=False)
class CoherentPulse:
    """Coherent state of one optical pulse.

    ``amplitude`` is in units of sqrt(photons); ``polarization`` is a unit
    Jones vector; times are in seconds.
    """

    amplitude: complex
    polarization: np.ndarray = field(default_factory=lambda: H.copy())
    emit_time: float = 0.0
    duration: float = 50e-9

    def __post_init__(self):
        pol = np.asarray(self.polarization, dtype=complex).reshape(2)
        object.__setattr__(self, "polarization", pol)
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if abs(np.linalg.norm(pol) - 1.0) > 1e-12:
            raise InvalidArgument("polarization must be a unit Jones vector")
        if not np.isfinite(abs(self.amplitude)):
            raise InvalidArgument("amplitude must be finite")
        if not self.duration > 0:
            raise InvalidArgument("duration must be positive")

    @classmethod
    def from_photons(cls, photons, phase=0.0, **kwargs):
        if photons < 0:
            raise InvalidArgument("photon number must be non-negative")
        return cls(math.sqrt(photons) * np.exp(1j * phase), **kwargs)

    @property
    def photons(self):
        return abs(self.amplitude) ** 2

    @property
    def field(self):
        return self.amplitude * self.polarization

    def replace(self, **changes):
        return replace(self, **changes)


def apply_jones(pulse, matrix):
    """Propagate ``pulse`` through a Jones matrix.

    Any global phase of the matrix ends up in the polarization vector, so
    only the full field ``amplitude * polarization`` is meaningful.
    """
    out = np.asarray(matrix, dtype=complex) @ pulse.polarization
    scale = float(np.linalg.norm(out))
    if scale == 0.0:
        return pulse.replace(amplitude=0j)
    return pulse.replace(amplitude=pulse.amplitude * scale, polarization=out / scale)


def apply_loss(pulse, loss_db):
    """Attenuate a pulse by ``loss_db``; polarization and timing are kept."""
    if loss_db < 0:
        raise InvalidArgument(f"loss must be non-negative, got {loss_db}")
    return pulse.replace(amplitude=pulse.amplitude * 10 ** (-loss_db / 20))


def delay(pulse, seconds):
    return pulse.replace(emit_time=pulse.emit_time + seconds)


def is_unitary(matrix, tol=1e-10):
    m = np.asarray(matrix, dtype=complex)
    return m.shape == (2, 2) and np.linalg.norm(m.conj().T @ m - np.eye(2)) < tol


def random_unitary(rng):
    """Haar-random 2x2 unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def su2(generator):
    """exp(-i g.sigma) for a real 3-vector ``g``."""
    g = np.asarray(generator, dtype=float)
    angle = float(np.linalg.norm(g))
    if angle == 0.0:
        return np.eye(2, dtype=complex)
    n = g / angle
    return math.cos(angle) * np.eye(2) - 1j * math.sin(angle) * np.tensordot(n, _PAULI, 1)


def faraday_round_trip(jones, mirror=FARADAY_MIRROR):
    """Round-trip operator ``J^T M J`` of a reciprocal fibre ended by ``mirror``.

    For the Faraday mirror the result is ``det(J) * M`` for every unitary
    ``J``: the returning light is orthogonal to the launched light whatever
    the fibre birefringence.
    """
    j = np.asarray(jones, dtype=complex)
    if not is_unitary(j):
        raise InvalidArgument("fibre Jones matrix must be unitary")
    return j.T @ np.asarray(mirror, dtype=complex) @ j


@dataclass(frozen=True)
class FiberChannel:
    """Single-mode fibre spool.

    Attributes:
        length: km.
        loss_coeff: dB/km.
        excess_loss: dB, lumped (connectors, splices).
        birefringence_drift_time: correlation time of the fibre Jones
            matrix in seconds; ``inf`` freezes it.
        phase_drift_rate: random-walk coefficient of the fibre phase, rad/sqrt(s).
        backscatter_coeff: fraction of the outgoing LO returned into the
            signal mode per pulse train in flight.
    """

    length: float = 1.0
    loss_coeff: float = 0.2
    excess_loss: float = 0.0
    birefringence_drift_time: float = 600.0
    phase_drift_rate: float = 1.0
    backscatter_coeff: float = 0.0

    def __post_init__(self):
        if self.length < 0 or self.loss_coeff < 0 or self.excess_loss < 0:
            raise InvalidArgument("fibre length and losses must be non-negative")
        if not self.birefringence_drift_time > 0:
            raise InvalidArgument("birefringence_drift_time must be positive")
        if self.phase_drift_rate < 0 or self.backscatter_coeff < 0:
            raise InvalidArgument("drift rate and backscatter must be non-negative")

    @property
    def total_loss_db(self):
        return self.length * self.loss_coeff + self.excess_loss

    @property
    def transmission(self):
        return 10 ** (-self.total_loss_db / 10)

    @property
    def round_trip_time(self):
        return 2 * FIBER_DELAY_PER_KM * self.length


_N_MODES = 24


def fiber_jones(channel, t, seed):
    """Birefringence of ``channel`` at time ``t``.

    The Jones matrix is ``J0 @ exp(-i (a(t) - a(0)).sigma)`` where ``J0`` is
    Haar-random and ``a(t)`` is a stationary Gaussian process (random
    Fourier features with a Gaussian spectrum) whose correlation time is
    ``birefringence_drift_time``. The same ``(seed, t)`` always gives the
    same matrix and the result is continuous in ``t``.
    """
    rng = np.random.default_rng(seed)
    j0 = random_unitary(rng)
    tau = channel.birefringence_drift_time
    if math.isinf(tau):
        return j0
    omega = rng.standard_normal(_N_MODES) / tau
    phase = rng.uniform(0, 2 * np.pi, _N_MODES)
    weight = rng.standard_normal((3, _N_MODES)) * (np.pi / 2) * math.sqrt(2 / _N_MODES)
    a_t = weight @ np.cos(omega * t + phase)
    a_0 = weight @ np.cos(phase)
    return j0 @ su2(a_t - a_0)


def differential_phase(channel, separation, rng):
    """Phase picked up between two pulses ``separation`` seconds apart."""
    sigma = channel.phase_drift_rate * math.sqrt(separation)
    return float(rng.normal(0.0, sigma)) if sigma > 0 else 0.0


def backscatter_noise_variance(channel, lo_photons, trains_in_flight):
    """Added quadrature variance (vacuum = 1/2) from Rayleigh backscatter.

    Zero while only one pulse train is in the link; grows linearly with the
    LO intensity and with every extra train travelling the other way.
    """
    if trains_in_flight < 1:
        raise InvalidArgument("at least one pulse train is always in flight")
    return channel.backscatter_coeff * lo_photons * (trains_in_flight - 1)


_KINDS = ("coupler", "isolator", "pbs", "faraday_mirror", "attenuator")


@dataclass(frozen=True)
class ComponentSpec:
    """Parameters of one fibred component.

    Only the fields relevant to ``kind`` are used. Losses are in dB; the
    PDL of a coupler acts on its first output port along the H axis.
    """

    kind: str
    split_ratio: float = 0.5
    pdl_db: float = 0.0
    fwd_loss_db: float = 0.0
    bwd_loss_db: float = 0.0
    insertion_loss_db: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidArgument(f"unknown component kind {self.kind!r}")
        if not 0.0 <= self.split_ratio <= 1.0:
            raise InvalidArgument("split_ratio must lie in [0, 1]")
        losses = (self.pdl_db, self.fwd_loss_db, self.bwd_loss_db, self.insertion_loss_db)
        if min(losses) < 0:
            raise InvalidArgument("losses must be non-negative")
        if self.kind == "isolator" and self.bwd_loss_db < self.fwd_loss_db:
            raise InvalidArgument("isolator backward loss must exceed forward loss")

    @classmethod
    def coupler(cls, split_ratio=0.5, pdl_db=0.01, insertion_loss_db=0.0):
        return cls("coupler", split_ratio=split_ratio, pdl_db=pdl_db,
                   insertion_loss_db=insertion_loss_db)

    @classmethod
    def isolator(cls, fwd_loss_db=1.0, bwd_loss_db=60.0):
        return cls("isolator", fwd_loss_db=fwd_loss_db, bwd_loss_db=bwd_loss_db)

    @classmethod
    def tap_coupler(cls):
        """98/2 coupler used instead of a circulator on the signal path."""
        return cls("coupler", split_ratio=0.98, insertion_loss_db=0.1)

    @classmethod
    def attenuator(cls, loss_db):
        return cls("attenuator", insertion_loss_db=loss_db)


def _coupler_ports(spec):
    pdl = 10 ** (-spec.pdl_db / 10)
    il = 10 ** (-spec.insertion_loss_db / 10)
    r = spec.split_ratio
    port1 = np.diag([math.sqrt(il * r), math.sqrt(il * r * pdl)]).astype(complex)
    port2 = math.sqrt(il * (1 - r)) * np.eye(2, dtype=complex)
    return port1, port2


def split(spec, pulse):
    """Outputs of a coupler or PBS as a pair of pulses."""
    if spec.kind == "coupler":
        m1, m2 = _coupler_ports(spec)
    elif spec.kind == "pbs":
        m1 = np.diag([1.0, 0.0]).astype(complex)
        m2 = np.diag([0.0, 1.0]).astype(complex)
    else:
        raise InvalidArgument(f"{spec.kind} has a single output")
    return apply_jones(pulse, m1), apply_jones(pulse, m2)


def effective_split_ratio(spec, polarization):
    """Fraction of the coupler output power leaving port 1."""
    pulse = CoherentPulse(1.0, polarization=polarization)
    p1, p2 = split(spec, pulse)
    return p1.photons / (p1.photons + p2.photons)


def transmit(spec, pulse, forward=True):
    """Pass ``pulse`` through a single-output component."""
    if spec.kind == "isolator":
        return apply_loss(pulse, spec.fwd_loss_db if forward else spec.bwd_loss_db)
    if spec.kind == "attenuator":
        return apply_loss(pulse, spec.insertion_loss_db)
    if spec.kind == "faraday_mirror":
        return apply_jones(apply_loss(pulse, spec.insertion_loss_db), FARADAY_MIRROR)
    raise InvalidArgument(f"{spec.kind} has two outputs; use split()")
