"""Command-line scenario runner.

Each subcommand runs one experiment and writes ``<out>/<name>.csv`` with a
header row and a trailing ``# key=value`` block holding the resolved
configuration. Exit status: 0 on success, 1 on configuration errors, 2 on
runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import __version__, homodyne, keyrate, link as linkmod, modulation
from .analysis import REFERENCE_14KM, REFERENCE_20M, comparison_error
from .config import KINDS, apply_link_overrides, load_scenario, resolved_items
from .errors import ConfigError

# (loss dB, max photons at Alice, repetition rate) of the two key-rate cases
KEYRATE_CASES = ((0.88, 30.0, 50e3), (3.1, 20.0, 6.7e3))


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def write_csv(path, header, rows, metadata):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        for key, value in metadata:
            f.write(f"# {key}={_fmt(value)}\n")


def _link_for(scenario, preset):
    return apply_link_overrides(preset, scenario.link_overrides)


def _samples(scenario, default):
    return scenario.samples if scenario.samples is not None else default


def run_calibrate(s):
    cal = _link_for(s, linkmod.LinkConfig()).detector
    lo_min, lo_max = s.options.get("lo_range", [1e5, 1e8])
    lo = np.logspace(math.log10(lo_min), math.log10(lo_max), s.options.get("lo_points", 10))
    rng = np.random.default_rng(np.random.SeedSequence(s.seed))
    points = homodyne.simulate_noise_curve(cal, lo, _samples(s, 100_000), rng)
    fit = homodyne.fit_noise_curve(points)
    rows = [(n, v, fit.v_electr, fit.a) for n, v in points]
    meta = resolved_items(None, s) + [
        ("configured_v_electr", cal.v_electr), ("configured_a", cal.a),
        ("fit_crossover_photons", fit.crossover_photons), ("fit_r_squared", fit.r_squared),
    ]
    return ["lo_photons", "variance", "fit_v_electr", "fit_a"], rows, meta


def run_sweep(s):
    link = _link_for(s, linkmod.lab_link(0.02))
    intensities = s.options.get("intensities", list(linkmod.SWEEP_INTENSITIES))
    n = _samples(s, 4000)
    sweeps = linkmod.run_phase_sweep(link, intensities, n, s.seed, s.workers)
    rows, meta = [], resolved_items(link, s)
    for recs in sweeps:
        for r in recs:
            rows.append((s.name, r.target_photons, r.phase_step, r.applied_phase,
                         r.mean, r.std, len(r.samples)))
        fit = linkmod.fit_sweep(recs)
        meta += [(f"fit_amplitude[{recs[0].target_photons:g}]", fit.amplitude),
                 (f"fit_amplitude_stderr[{recs[0].target_photons:g}]", fit.amplitude_stderr)]
    header = ["scenario_id", "intensity", "phase_index", "applied_phase", "mean", "std", "n_samples"]
    return header, rows, meta


def run_stability(s):
    link = _link_for(s, linkmod.lab_link(1.0, alice_max_photons=50.0))
    o = s.options
    rep = linkmod.run_stability(
        link, o.get("state_photons", 21.0), int(o.get("n_runs", 5)), o.get("interval_hours", 1.0),
        _samples(s, 4000), o.get("laser_drift", 0.07), s.seed, s.workers)
    phases = linkmod.phase_grid()
    rows = []
    for r, t in enumerate(rep.run_times):
        for k, phi in enumerate(phases):
            x, p = rep.per_run_means[r, k]
            rows.append((s.name, r, t, k, phi, x, p, rep.per_run_amplitudes[r, k]))
    meta = resolved_items(link, s) + [
        ("reproducibility", rep.reproducibility),
        ("mean_amplitude", rep.mean_amplitude),
        ("amplitude_precision", rep.amplitude_precision),
    ]
    header = ["scenario_id", "run", "time_hours", "phase_index", "applied_phase",
              "mean_x", "mean_p", "amplitude"]
    return header, rows, meta


def run_table1(s):
    n = _samples(s, 4000)
    target_error = s.options.get("calibration_jitter_error", 2.2)
    rows, meta = [], []
    calibrated = None
    for length, table in ((0.02, REFERENCE_20M), (14.0, REFERENCE_14KM)):
        link = _link_for(s, linkmod.lab_link(length))
        if calibrated is None:
            first = table[0][0] / link.signal_transmission
            calibrated = modulation.calibrate_timing_jitter(
                link.modulator, first, link.alice_max_photons, target_error, seed=s.seed)
        link = link.replace(modulator=calibrated)
        targets = [row[0] for row in table]
        est = linkmod.run_table1(link, targets, n, s.seed, s.workers)
        for (n_std, n_hom), ref in zip(est, table):
            rows.append((f"{length:g}km", n_std, n_hom, comparison_error(n_std, n_hom),
                         ref[1], ref[2]))
        meta += [(f"link[{length:g}km]." + k, v) for k, v in resolved_items(link, s)]
    meta.append(("timing_offset_sigma_calibrated", calibrated.timing_offset_sigma))
    header = ["fiber", "n_standard", "n_homodyne", "error_percent",
              "reference_n_homodyne", "reference_error_percent"]
    return header, rows, meta


def run_keyrate(s):
    o = s.options
    losses = o.get("keyrate_losses", [c[0] for c in KEYRATE_CASES])
    photons = o.get("keyrate_max_photons", [c[1] for c in KEYRATE_CASES])
    rates = o.get("keyrate_rep_rates", [c[2] for c in KEYRATE_CASES])
    if not len(losses) == len(photons) == len(rates):
        raise ConfigError("keyrate_losses, keyrate_max_photons and keyrate_rep_rates must have equal length")
    link = _link_for(s, linkmod.LinkConfig())
    rows = []
    for loss, n, rate in zip(losses, photons, rates):
        for r in keyrate.rate_table(loss, n, rate, link.detector, link.lo_photons,
                                    total_std=link.total_noise_std):
            rows.append((r["loss_db"], n, rate, r["mode"], r["va_interpretation"],
                         r["v_el_source"], r["V_A"], r["G"], r["chi_line"], r["chi_hom"],
                         r["I_AB"], r["I_BE"], r["delta_I"], r["bits_per_second"]))
    header = ["loss_db", "max_photons", "rep_rate_hz", "mode", "va_interpretation",
              "v_el_source", "V_A", "G", "chi_line", "chi_hom", "I_AB", "I_BE",
              "delta_I", "bits_per_second"]
    return header, rows, resolved_items(None, s)


def run_rate_limit(s):
    base = _link_for(s, linkmod.lab_link(14.0))
    lengths = s.options.get("fiber_lengths", [0, 0.02, 1, 2, 5, 10, 14, 20, 25])
    rep_rates = s.options.get("rep_rates", [1e3, 3e3, 6.7e3, 1e4, 2e4, 5e4, 1e5, 2e5])
    rows = []
    for km in lengths:
        rows.append(("limit", km, linkmod.max_repetition_rate(km, base.electrical_pulse, False),
                     linkmod.max_repetition_rate(km, base.electrical_pulse, True), "", ""))
    free = base.replace(single_train_enforced=False)
    for rate in rep_rates:
        if rate > (1 + 1e-9) / base.electrical_pulse:
            continue
        lk = free.replace(rep_rate=min(rate, 1 / base.electrical_pulse))
        # common random numbers: the same seed at every rate
        var = linkmod.detection_variance(lk, s.seed, _samples(s, 20000))
        rows.append(("noise", base.fiber.length, "", "", rate, var,))
    header = ["row", "fiber_km", "detector_limit_hz", "max_rate_hz", "rep_rate_hz", "variance"]
    return header, rows, resolved_items(base, s)


RUNNERS = {
    "calibrate": run_calibrate,
    "sweep": run_sweep,
    "stability": run_stability,
    "table1": run_table1,
    "keyrate": run_keyrate,
    "rate_limit": run_rate_limit,
}


def run_scenario(scenario):
    """Run ``scenario`` and write its CSV; returns the output path."""
    header, rows, meta = RUNNERS[scenario.kind](scenario)
    os.makedirs(scenario.output_path, exist_ok=True)
    path = os.path.join(scenario.output_path, f"{scenario.name}.csv")
    write_csv(path, header, rows, [("version", __version__)] + meta)
    return path


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: config error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value scenario file")
    common.add_argument("--seed", type=int, help="unsigned 64-bit scenario seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--samples", type=int, help="homodyne samples per point")
    common.add_argument("--workers", type=int, help="parallel workers")
    parser = _Parser(prog="cvpnp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for kind in KINDS:
        sub.add_parser(kind.replace("_", "-"), parents=[common])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    kind = args.command.replace("-", "_")
    try:
        text = ""
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as f:
                    text = f.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        scenario = load_scenario(kind, text, seed=args.seed, samples=args.samples,
                                 workers=args.workers, output_path=args.out)
        path = run_scenario(scenario)
    except ConfigError as exc:
        where = f"{args.config}:" if args.config and exc.line else ""
        print(f"cvpnp: config error: {where}{exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"cvpnp: error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
