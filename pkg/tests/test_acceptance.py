"""End-to-end acceptance checks.

Each test records one ``PASS``/``FAIL`` line; ``conftest.py`` prints them
at the end of the session. Running this file directly prints them too.
"""

import math
import time

import numpy as np
import pytest

from cvpnp import link as L
from cvpnp import modulation as M
from cvpnp import optics
from cvpnp.analysis import REFERENCE_14KM, REFERENCE_20M, comparison_error
from cvpnp.cli import main
from cvpnp.homodyne import (
    NoiseCalibration,
    balance_epsilon_bound,
    epsilon_to_db,
    fit_noise_curve,
    simulate_noise_curve,
)
from cvpnp.keyrate import (
    DetectionParams,
    KeyRateParams,
    bits_per_second,
    channel_from_loss,
    headline_rate,
    key_rate_rr_individual,
    modulation_variance,
)

RESULTS = []


def record(number, name, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
    assert ok, detail


def test_1_shot_noise_linearity():
    cal = NoiseCalibration(v_electr=1e6, a=1.0)
    start = time.perf_counter()
    pts = simulate_noise_curve(cal, np.logspace(5, 8, 10), 100_000, np.random.default_rng(2024))
    fit = fit_noise_curve(pts)
    elapsed = time.perf_counter() - start
    ok = (abs(fit.v_electr / cal.v_electr - 1) <= 0.02 and abs(fit.a / cal.a - 1) <= 0.02
          and abs(fit.crossover_photons / 1e6 - 1) <= 0.05 and elapsed < 10)
    record(1, "shot-noise linearity", ok,
           f"v_el={fit.v_electr:.4g} a={fit.a:.4f} crossover={fit.crossover_photons:.4g} "
           f"time={elapsed:.2f}s")


def test_2_balance_math():
    eps = balance_epsilon_bound(1e8)
    db = epsilon_to_db(eps)
    ok = round(eps, 7) == 3.54e-5 and round(eps, 5) == 4e-5 and float(f"{db:.1g}") == 3e-4
    record(2, "balance math", ok, f"epsilon={eps:.4g} dB={db:.3g}")


def test_3_faraday_compensation():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        j = optics.random_unitary(rng)
        d = optics.faraday_round_trip(j) - np.linalg.det(j) * optics.FARADAY_MIRROR
        worst = max(worst, np.abs(d).max())
    base = L.lab_link(0.02)
    ref = L.fit_sweep(L.run_phase_sweep(base.replace(frozen_jones=np.eye(2)), [4.0], 4000, 11)[0])
    frozen = base.replace(frozen_jones=optics.random_unitary(np.random.default_rng(3)))
    fit = L.fit_sweep(L.run_phase_sweep(frozen, [4.0], 4000, 11)[0])
    se = math.hypot(ref.amplitude_stderr, fit.amplitude_stderr)
    pull = abs(fit.amplitude - ref.amplitude) / se
    ok = worst < 1e-10 and pull < 3
    record(3, "Faraday auto-compensation", ok, f"max deviation={worst:.2g} A/B pull={pull:.2f} SE")


def test_4_phase_sweeps():
    start = time.perf_counter()
    sweeps = L.run_phase_sweep(L.lab_link(0.02), list(L.SWEEP_INTENSITIES), 4000, 0)
    elapsed = time.perf_counter() - start
    pulls = []
    for n, recs in zip(L.SWEEP_INTENSITIES, sweeps):
        fit = L.fit_sweep(recs)
        pulls.append(abs(fit.amplitude - math.sqrt(2 * n)) / fit.amplitude_stderr)
    ok = len(sweeps[0]) == 17 and max(pulls) < 3 and elapsed < 60
    record(4, "phase sweeps", ok, f"max pull={max(pulls):.2f} SE time={elapsed:.2f}s")


def test_5_photon_number_comparison():
    worst = max(abs(comparison_error(a, b) - e) for a, b, e in REFERENCE_20M + REFERENCE_14KM)
    lk = L.lab_link(0.02)
    t = lk.signal_transmission
    spec = M.calibrate_timing_jitter(lk.modulator, REFERENCE_20M[0][0] / t, lk.alice_max_photons,
                                     REFERENCE_20M[0][2], seed=0)
    err = M.preparation_error(spec, [r[0] / t for r in REFERENCE_20M], lk.alice_max_photons,
                              np.random.default_rng(0))
    ok = worst <= 0.1 and np.all(np.diff(err) > 0) and err[-1] >= 20
    record(5, "photon-number comparison", ok, f"metric max dev={worst:.3f} trend={np.round(err, 1).tolist()}")


def test_6_stability():
    lk = L.lab_link(1.0, alice_max_photons=50.0)
    still = L.run_stability(lk, laser_drift=0.0, seed=0)
    drift = L.run_stability(lk, laser_drift=0.07, seed=0)
    target = 1.1 / math.sqrt(4000)
    ok = (abs(still.reproducibility / target - 1) <= 0.2
          and 0.15 <= drift.reproducibility <= 0.35
          and 0.15 / 6.3 <= drift.amplitude_precision <= 0.35 / 6.3)
    record(6, "stability", ok,
           f"no drift={still.reproducibility:.4f} (target {target:.4f}) "
           f"7% drift={drift.reproducibility:.3f} precision={100 * drift.amplitude_precision:.1f}%")


def test_7_rate_limits():
    r0, r14 = L.max_repetition_rate(0), L.max_repetition_rate(14)
    slow = L.lab_link(14.0)
    fast = slow.replace(single_train_enforced=False, rep_rate=50e3)
    v_slow, v_fast = L.detection_variance(slow, 0), L.detection_variance(fast, 0)
    ok = r0 == pytest.approx(200e3) and r14 == pytest.approx(7142.857, abs=0.01) \
        and r14 >= 6.7e3 and v_fast > v_slow
    record(7, "repetition-rate limits", ok,
           f"0 km={r0:.0f} Hz 14 km={r14:.2f} Hz variance 6.7k={v_slow:.3f} 50k={v_fast:.3f}")


def test_8_key_rates():
    products = (bits_per_second(0.63, 50e3), bits_per_second(0.18, 6.7e3))
    low, high = headline_rate(0.88, 30), headline_rate(3.1, 20)
    kp = KeyRateParams(modulation_variance(30), "ideal")
    positive = all(key_rate_rr_individual(channel_from_loss(x), DetectionParams(), kp) > 0
                   for x in np.linspace(0, 30, 301))
    ok = (products[0] == pytest.approx(31_500) and products[1] == pytest.approx(1_206)
          and 0.44 <= low <= 0.82 and 0.126 <= high <= 0.234 and positive)
    record(8, "key rates", ok,
           f"{products[0]:.0f}/{products[1]:.0f} bit/s realistic 0.88 dB={low:.3f} "
           f"3.1 dB={high:.3f} ideal positive to 30 dB={positive}")


def _rows(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def test_9_determinism(tmp_path):
    same, across = True, True
    for cmd in (["sweep", "--samples", "300"], ["stability", "--samples", "200"],
                ["table1", "--samples", "300"], ["rate-limit", "--samples", "2000"]):
        out = {}
        for tag, workers in (("a", "1"), ("b", "1"), ("c", "4"), ("d", "4")):
            d = tmp_path / tag
            assert main(cmd + ["--seed", "42", "--workers", workers, "--out", str(d)]) == 0
            out[tag] = next(d.glob(f"{cmd[0].replace('-', '_')}.csv"))
        same &= out["a"].read_bytes() == out["b"].read_bytes()
        same &= out["c"].read_bytes() == out["d"].read_bytes()
        across &= _rows(out["a"]) == _rows(out["c"])
    record(9, "determinism", same and across, f"byte-identical={same} workers 1 vs 4 equal={across}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
