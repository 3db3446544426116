"""Go-&-return link: Bob -> fibre -> Alice (modulator, Faraday mirror) -> Bob.

Bob splits each laser pulse into a bright LO and a weak signal 50 ns apart.
Both cross the same fibre twice; the Faraday mirror returns them in the
orthogonal polarization, so Bob's PBS sends each back along the other
pulse's outbound path and the two meet again at the 50/50 coupler with
identical delays, phases and polarizations.

Experiments are split into cells (intensity x phase step x ...); each cell
draws from its own RNG stream keyed by the scenario seed and the cell
index, so results do not depend on how many workers run them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import optics
from .analysis import fit_cosine, photons_from_amplitude, reproducibility
from .errors import ConfigError, UnreachableSetpoint
from .homodyne import VACUUM_VARIANCE, BalanceState, NoiseCalibration, measure
from .modulation import (
    ModulatorSpec,
    dual_drive_transfer,
    effective_transmission,
    solve_drive,
)
from .optics import CoherentPulse, FiberChannel

N_PHASE_STEPS = 17
SWEEP_INTENSITIES = (9, 3, 1, 0.3, 0.1, 0.03, 0.01)


@dataclass(frozen=True)
class LinkConfig:
    """Static configuration of the link.

    Attributes:
        fiber: spool between Bob and Alice.
        bob_signal_loss_db: signal loss from Bob's input to the 50/50 coupler.
        lo_photons: LO photons per pulse at the detector (also the
            normalization reference).
        pulse_separation: LO-to-signal delay, seconds.
        electrical_pulse: detector response time, seconds.
        rep_rate: pulse-pair repetition rate, Hz.
        single_train_enforced: refuse rates at which more than one pulse
            train is in the fibre; when False, backscatter noise is added.
        alice_max_photons: signal photons leaving Alice with the modulator
            fully open.
        total_noise_std: measured total quadrature noise of the detector;
            whatever shot and electronic noise do not explain is added as
            excess noise.
        mirror: ``"faraday"`` or ``"ordinary"`` (the latter for showing
            what compensation buys).
        fiber_seed: seed of the fibre birefringence process.
        pbs_return_loss_db: LO reflected by the PBS into the signal path.
        reflection_delay: arrival delay of that reflection after the signal.
        force_reflection_overlap: move the reflection onto the signal
            (fault injection).
        frozen_jones: fixed fibre Jones matrix replacing the drifting one.
    """

    fiber: FiberChannel = field(default_factory=FiberChannel)
    bob_signal_loss_db: float = 2.4
    lo_photons: float = 1e8
    pulse_separation: float = 50e-9
    electrical_pulse: float = 5e-6
    rep_rate: float = 50e3
    single_train_enforced: bool = True
    alice_max_photons: float = 30.0
    modulator: ModulatorSpec = field(default_factory=ModulatorSpec)
    detector: NoiseCalibration = field(default_factory=NoiseCalibration)
    balance: BalanceState = field(default_factory=BalanceState)
    total_noise_std: float = 1.1
    mirror: str = "faraday"
    fiber_seed: int = 0
    pbs_return_loss_db: float = 50.0
    reflection_delay: float = 100e-9
    force_reflection_overlap: bool = False
    frozen_jones: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.lo_photons > 0:
            raise ConfigError("lo_photons must be positive")
        if self.bob_signal_loss_db < 0:
            raise ConfigError("bob_signal_loss_db must be non-negative")
        if not (self.rep_rate > 0 and self.pulse_separation > 0 and self.electrical_pulse > 0):
            raise ConfigError("rates and durations must be positive")
        if self.rep_rate > 1 / self.electrical_pulse * (1 + 1e-12):
            raise ConfigError(
                f"rep_rate {self.rep_rate:g} Hz exceeds detector limit {1 / self.electrical_pulse:g} Hz"
            )
        if self.single_train_enforced and trains_in_flight(self.fiber, self.rep_rate) > 1:
            raise ConfigError(
                f"rep_rate {self.rep_rate:g} Hz puts more than one pulse train in the "
                f"{self.fiber.length:g} km link; lower it or disable single_train_enforced"
            )
        if self.mirror not in ("faraday", "ordinary"):
            raise ConfigError(f"unknown mirror {self.mirror!r}")
        if self.alice_max_photons <= 0:
            raise ConfigError("alice_max_photons must be positive")

    def replace(self, **changes):
        return replace(self, **changes)

    @property
    def signal_transmission(self):
        """Intensity transmission from Alice's output to Bob's coupler."""
        return self.fiber.transmission * 10 ** (-self.bob_signal_loss_db / 10)

    @property
    def excess_noise_var(self):
        electronic = VACUUM_VARIANCE * self.detector.crossover_photons / self.lo_photons
        return max(0.0, self.total_noise_std ** 2 - VACUUM_VARIANCE - electronic)


def lab_link(length_km, **changes):
    """Link matching one of the spools used in the experiments.

    The 1 km spool has a bad connector (0.88 dB in total) and the 14 km one
    measured 3.1 dB; both are modelled as excess loss on top of 0.2 dB/km.
    14 km runs at 6.7 kHz so that a single pulse train is in flight, with
    fewer photons available at Alice.
    """
    measured = {1.0: 0.88, 14.0: 3.1}
    excess = max(0.0, measured.get(float(length_km), 0.0) - 0.2 * length_km)
    fiber = FiberChannel(length=length_km, excess_loss=excess, backscatter_coeff=1e-9)
    defaults = dict(fiber=fiber, rep_rate=6.7e3 if length_km > 10 else 50e3,
                    alice_max_photons=20.0 if length_km > 10 else 30.0)
    defaults.update(changes)
    return LinkConfig(**defaults)


def trains_in_flight(fiber, rep_rate):
    """Pulse trains simultaneously inside Bob's device and the fibre."""
    return max(1, math.ceil(rep_rate * fiber.round_trip_time - 1e-9))


def max_repetition_rate(fiber_km, electrical_pulse=5e-6, single_train=True):
    """Highest rate allowed by the detector and, optionally, the round trip."""
    if fiber_km < 0:
        raise ValueError("fibre length must be non-negative")
    limit = 1 / electrical_pulse
    if single_train and fiber_km > 0:
        limit = min(limit, 1 / (2 * optics.FIBER_DELAY_PER_KM * fiber_km))
    return limit


def emit_pulse_pair(link, t, power_factor=1.0):
    """LO and signal leaving Bob at time ``t``.

    Intensities are set so that, with the Faraday mirror, the LO reaches
    the detector with ``lo_photons`` and the signal reaches Alice's
    modulator with ``alice_max_photons`` (both scaled by ``power_factor``).
    """
    g = link.fiber.transmission
    lo = CoherentPulse.from_photons(power_factor * link.lo_photons / g ** 2, emit_time=t)
    sig = CoherentPulse.from_photons(power_factor * link.alice_max_photons / g,
                                     emit_time=t + link.pulse_separation)
    return lo, sig


def _mirror(link):
    return optics.FARADAY_MIRROR if link.mirror == "faraday" else optics.ORDINARY_MIRROR


def _bob_phase(link):
    # Bob's unbalanced interferometer; both pulses cross its long arm once.
    return float(np.random.default_rng([link.fiber_seed, 1]).uniform(0, 2 * np.pi))


def _propagate(pulse, link, fiber_t):
    """Outbound fibre, mirror, return fibre for one pulse."""
    if link.frozen_jones is not None:
        j = np.asarray(link.frozen_jones, dtype=complex)
    else:
        j = optics.fiber_jones(link.fiber, fiber_t, link.fiber_seed)
    one_way = link.fiber.total_loss_db
    p = optics.apply_loss(optics.apply_jones(pulse, j), one_way)
    p = optics.apply_jones(p, _mirror(link))
    return optics.apply_loss(optics.apply_jones(p, j.T), one_way)


def _returned_pulses(pulse_pair, link, rng):
    """LO and unit-transmission signal at the 50/50 coupler, plus reflections.

    The signal is returned as if Alice's modulator were fully open;
    callers scale it by the modulator transmission.
    """
    lo, sig = pulse_pair
    phi_b = np.exp(1j * _bob_phase(link))
    lo = lo.replace(amplitude=lo.amplitude * phi_b)          # long arm out
    lo = _propagate(lo, link, lo.emit_time)
    sig = _propagate(sig, link, sig.emit_time)
    dphi = optics.differential_phase(link.fiber, link.pulse_separation, rng)
    sig = sig.replace(amplitude=sig.amplitude * np.exp(1j * dphi))

    # PBS: returning light leaves by the port orthogonal to the launch state
    ret = np.outer(optics.V, optics.V.conj())
    lo = optics.apply_jones(lo, ret)
    sig = optics.apply_jones(sig, ret)
    sig = sig.replace(amplitude=sig.amplitude * phi_b)       # long arm back
    sig = optics.apply_loss(sig, link.bob_signal_loss_db)
    sig = optics.delay(sig, link.fiber.round_trip_time)
    lo = optics.delay(lo, link.fiber.round_trip_time + link.pulse_separation)

    refl = optics.apply_loss(lo, link.pbs_return_loss_db)
    refl = refl.replace(polarization=sig.polarization if sig.photons > 0 else refl.polarization,
                        emit_time=sig.emit_time + (0.0 if link.force_reflection_overlap
                                                   else link.reflection_delay))
    return lo, sig, [refl]


def _in_gate(pulse, ref):
    return abs(pulse.emit_time - ref.emit_time) < ref.duration


def round_trip(pulse_pair, link, alice_cmd, t, rng, n_samples=1, bob_phase=0.0):
    """Send one pulse pair through the link and measure it ``n_samples`` times.

    ``bob_phase`` selects the measured quadrature (0 for x, pi/2 for p).
    Alice's requested photon number must be reachable at nominal laser
    power. Stray pulses outside the detection gate
    around the signal are ignored.
    """
    link.validate()
    if alice_cmd.target_photons > link.alice_max_photons * (1 + 1e-9):
        raise UnreachableSetpoint(f"{alice_cmd.target_photons:g} photons requested, "
                                  f"{link.alice_max_photons:g} available at Alice")
    lo, sig, strays = _returned_pulses(pulse_pair, link, rng)
    lo = lo.replace(amplitude=lo.amplitude * np.exp(1j * bob_phase))

    spec = link.modulator
    if spec.timing_offset_sigma > 0:
        offsets = rng.normal(0.0, spec.timing_offset_sigma, n_samples)
        gain = effective_transmission(spec, alice_cmd.v1, alice_cmd.v2, offsets, sig.duration)
    else:
        gain = np.full(n_samples, dual_drive_transfer(spec, alice_cmd.v1, alice_cmd.v2))

    stray_field = sum((p.field for p in strays if _in_gate(p, sig)), np.zeros(2, complex))
    if np.any(stray_field) and sig.photons > 0:
        # stray light in the gate adds a fixed field on top of the modulated signal
        gain = gain + np.vdot(sig.polarization, stray_field) / sig.amplitude

    n_trains = trains_in_flight(link.fiber, link.rep_rate)
    extra = link.excess_noise_var + optics.backscatter_noise_variance(
        link.fiber, link.lo_photons, n_trains)
    return measure(sig, lo, link.balance, link.detector, extra, rng, size=n_samples,
                   lo_reference=link.lo_photons, signal_gain=gain)


@dataclass(frozen=True, eq=False)
class SweepRecord:
    phase_step: int
    applied_phase: float
    target_photons: float
    samples: np.ndarray
    mean: float
    std: float
    quadrature_phase: float = 0.0


def phase_grid(n_steps=N_PHASE_STEPS):
    return 2 * np.pi * np.arange(n_steps) / n_steps


def _cell_rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _measure_cell(link, photons_at_coupler, phase, n_samples, rng, t=0.0,
                  bob_phase=0.0, power_factor=1.0):
    # Alice's drive is calibrated at nominal laser power
    prepared = photons_at_coupler / link.signal_transmission
    cmd = solve_drive(link.modulator, prepared, phase, link.alice_max_photons)
    pair = emit_pulse_pair(link, t, power_factor)
    return round_trip(pair, link, cmd, t, rng, n_samples, bob_phase)


def run_phase_sweep(link, intensities, n_samples_per_point, seed, workers=1,
                    bob_phase=0.0, t0=0.0, power_factor=1.0, n_steps=N_PHASE_STEPS):
    """Alice rotates each coherent state through ``n_steps`` phases over 2 pi.

    ``intensities`` are photon numbers at Bob's 50/50 coupler. Returns one
    list of records per intensity.
    """
    phases = phase_grid(n_steps)
    cells = [(i, k) for i in range(len(intensities)) for k in range(n_steps)]
    cell_time = n_samples_per_point / link.rep_rate

    def run(cell):
        i, k = cell
        rng = _cell_rng(seed, i, k)
        t = t0 + (i * n_steps + k) * cell_time
        s = _measure_cell(link, intensities[i], phases[k], n_samples_per_point, rng, t,
                          bob_phase, power_factor)
        x = s.normalized
        return SweepRecord(k, float(phases[k]), float(intensities[i]), x,
                           float(x.mean()), float(x.std(ddof=1)), bob_phase)

    flat = _map(run, cells, workers)
    return [flat[i * n_steps:(i + 1) * n_steps] for i in range(len(intensities))]


def fit_sweep(records):
    """Cosine fit of one intensity's sweep, with standard errors from the data."""
    phases = [r.applied_phase for r in records]
    means = [r.mean for r in records]
    sem = [r.std / math.sqrt(len(r.samples)) for r in records]
    return fit_cosine(phases, means, sigma=sem)


@dataclass(frozen=True, eq=False)
class StabilityReport:
    run_times: np.ndarray
    per_run_means: np.ndarray       # (runs, steps, 2): x and p quadrature means
    per_run_amplitudes: np.ndarray  # (runs, steps)
    reproducibility: float
    laser_drift_fraction: float

    @property
    def mean_amplitude(self):
        return float(self.per_run_amplitudes.mean())

    @property
    def amplitude_precision(self):
        return self.reproducibility / self.mean_amplitude


def laser_power_schedule(n_runs, laser_drift):
    """Relative laser power per run: linear ramp reaching ``1 + laser_drift``."""
    return 1 + laser_drift * np.arange(n_runs) / max(n_runs - 1, 1)


def run_stability(link, state_photons=21.0, n_runs=5, interval_hours=1.0, samples=4000,
                  laser_drift=0.07, seed=0, workers=1, same_seed_each_run=False):
    """Repeat a full phase rotation of one state at hourly intervals.

    Bob measures both quadratures at every phase step; the amplitude of the
    resulting (x, p) point is compared across runs. Laser power drifts
    linearly; the detector keeps the normalization from the first run.
    """
    if n_runs < 2:
        raise ValueError("stability needs at least two runs")
    times = np.arange(n_runs) * interval_hours
    power = laser_power_schedule(n_runs, laser_drift)
    phases = phase_grid()
    cells = [(r, q, k) for r in range(n_runs) for q in range(2) for k in range(len(phases))]

    def run(cell):
        r, q, k = cell
        rng = _cell_rng(seed, 0 if same_seed_each_run else r, q, k)
        t = times[r] * 3600.0 + (q * len(phases) + k) * samples / link.rep_rate
        s = _measure_cell(link, state_photons, phases[k], samples, rng, t,
                          q * np.pi / 2, power[r])
        return s.normalized.mean()

    flat = np.array(_map(run, cells, workers)).reshape(n_runs, 2, len(phases))
    means = flat.transpose(0, 2, 1)
    amps = np.hypot(means[..., 0], means[..., 1])
    return StabilityReport(times, means, amps, reproducibility(amps), laser_drift)


def run_table1(link, targets, samples, seed, workers=1):
    """Homodyne photon-number estimates for power-meter reference values."""
    sweeps = run_phase_sweep(link, targets, samples, seed, workers)
    rows = []
    for n, rec in zip(targets, sweeps):
        fit = fit_sweep(rec)
        rows.append((float(n), float(photons_from_amplitude(fit.amplitude))))
    return rows


def detection_variance(link, seed, n_samples=20000):
    """Quadrature variance of vacuum measured through the link."""
    rng = _cell_rng(seed, 0)
    pair = emit_pulse_pair(link, 0.0)
    cmd = solve_drive(link.modulator, 0.0, 0.0, link.alice_max_photons)
    return float(round_trip(pair, link, cmd, 0.0, rng, n_samples).normalized.var(ddof=1))
