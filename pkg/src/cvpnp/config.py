"""Flat ``key = value`` scenario files.

Blank lines and ``#`` comments are ignored. Values are numbers, booleans
(``true``/``false``), bare strings, or comma-separated number lists. Every
key is optional; unset link fields keep the defaults of the scenario's
reference link.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .errors import ConfigError
from .homodyne import BalanceState, NoiseCalibration
from .modulation import ModulatorSpec
from .optics import FiberChannel

KINDS = ("calibrate", "sweep", "stability", "table1", "keyrate", "rate_limit")

# config key -> (section, field)
LINK_KEYS = {
    "fiber_length": ("fiber", "length"),
    "loss_coeff": ("fiber", "loss_coeff"),
    "excess_loss": ("fiber", "excess_loss"),
    "birefringence_drift_time": ("fiber", "birefringence_drift_time"),
    "phase_drift_rate": ("fiber", "phase_drift_rate"),
    "backscatter_coeff": ("fiber", "backscatter_coeff"),
    "bob_signal_loss_db": ("link", "bob_signal_loss_db"),
    "lo_photons": ("link", "lo_photons"),
    "pulse_separation": ("link", "pulse_separation"),
    "electrical_pulse": ("link", "electrical_pulse"),
    "rep_rate": ("link", "rep_rate"),
    "single_train_enforced": ("link", "single_train_enforced"),
    "alice_max_photons": ("link", "alice_max_photons"),
    "total_noise_std": ("link", "total_noise_std"),
    "mirror": ("link", "mirror"),
    "fiber_seed": ("link", "fiber_seed"),
    "pbs_return_loss_db": ("link", "pbs_return_loss_db"),
    "reflection_delay": ("link", "reflection_delay"),
    "force_reflection_overlap": ("link", "force_reflection_overlap"),
    "v_pi": ("modulator", "v_pi"),
    "gate_duration": ("modulator", "gate_duration"),
    "edge_time": ("modulator", "edge_time"),
    "timing_offset_sigma": ("modulator", "timing_offset_sigma"),
    "v_electr": ("detector", "v_electr"),
    "detector_a": ("detector", "a"),
    "epsilon": ("balance", "epsilon"),
    "pol_sensitivity": ("balance", "pol_sensitivity"),
}

SCENARIO_KEYS = {
    "name": str,
    "seed": int,
    "samples": int,
    "workers": int,
    "intensities": list,
    "state_photons": float,
    "laser_drift": float,
    "n_runs": int,
    "interval_hours": float,
    "lo_range": list,
    "lo_points": int,
    "calibration_jitter_error": float,
    "keyrate_losses": list,
    "keyrate_max_photons": list,
    "keyrate_rep_rates": list,
    "fiber_lengths": list,
    "rep_rates": list,
}


@dataclass
class Scenario:
    name: str
    kind: str
    seed: int = 0
    samples: int | None = None
    workers: int = 1
    link_overrides: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    output_path: str = "."

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.samples is not None and self.samples < 2:
            raise ConfigError("samples must be at least 2")


def _parse_value(text, lineno):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if "," in text:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad number list {text!r}", lineno) from None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text.strip("\"'")


def parse_config_text(text):
    """Return ``{key: (value, line_number)}`` for a config file body."""
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError("empty key or value", lineno)
        if key not in LINK_KEYS and key not in SCENARIO_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        entries[key] = (_parse_value(value, lineno), lineno)
    return entries


def _coerce(key, value, kind, lineno):
    if kind is list:
        return list(value) if isinstance(value, list) else [float(value)]
    if kind is str:
        return str(value)
    if isinstance(value, (bool, list)) or isinstance(value, str):
        raise ConfigError(f"{key} must be a number", lineno)
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"{key} must be an integer", lineno)
        return int(value)
    return float(value)


def load_scenario(kind, text="", **cli):
    """Build a :class:`Scenario` from config text plus command-line overrides.

    Command-line values (``seed``, ``samples``, ``workers``, ``output_path``)
    win over the file when not ``None``.
    """
    entries = parse_config_text(text)
    overrides, options = {}, {}
    scen = {"name": kind, "seed": 0, "workers": 1, "samples": None}
    for key, (value, lineno) in entries.items():
        if key in LINK_KEYS:
            overrides[key] = (value, lineno)
            continue
        v = _coerce(key, value, SCENARIO_KEYS[key], lineno)
        if key in ("name", "seed", "workers", "samples"):
            scen[key] = v
        else:
            options[key] = v
    for key in ("seed", "samples", "workers"):
        if cli.get(key) is not None:
            scen[key] = cli[key]
    try:
        return Scenario(kind=kind, link_overrides=overrides, options=options,
                        output_path=cli.get("output_path") or ".", **scen)
    except ConfigError as exc:
        line = next((entries[k][1] for k in ("seed", "workers", "samples") if k in entries), None)
        if exc.line is None and line is not None:
            raise ConfigError(str(exc), line) from None
        raise


def apply_link_overrides(link, overrides):
    """Copy of ``link`` with config overrides applied; errors carry line numbers."""
    parts = {
        "fiber": dataclasses.asdict(link.fiber),
        "modulator": dataclasses.asdict(link.modulator),
        "detector": {"v_electr": link.detector.v_electr, "a": link.detector.a},
        "balance": dataclasses.asdict(link.balance),
        "link": {},
    }
    last_line = None
    for key, (value, lineno) in overrides.items():
        section, name = LINK_KEYS[key]
        if isinstance(value, list):
            raise ConfigError(f"{key} takes a single value", lineno)
        if name in ("single_train_enforced", "force_reflection_overlap"):
            if not isinstance(value, bool):
                raise ConfigError(f"{key} must be true or false", lineno)
        elif name == "mirror":
            value = str(value)
        elif isinstance(value, (bool, str)):
            raise ConfigError(f"{key} must be a number", lineno)
        parts[section][name] = value
        last_line = lineno

    def build(cls, kwargs, section):
        try:
            return cls(**kwargs)
        except ValueError as exc:
            lines = [ln for k, (_, ln) in overrides.items() if LINK_KEYS[k][0] == section]
            raise ConfigError(str(exc), min(lines) if lines else None) from None

    fiber = build(FiberChannel, parts["fiber"], "fiber")
    modulator = build(ModulatorSpec, parts["modulator"], "modulator")
    detector = build(NoiseCalibration, parts["detector"], "detector")
    balance = build(BalanceState, parts["balance"], "balance")
    try:
        return link.replace(fiber=fiber, modulator=modulator, detector=detector,
                            balance=balance, **parts["link"])
    except ValueError as exc:
        raise ConfigError(str(exc), last_line) from None


def resolved_items(link, scenario):
    """Flat ``(key, value)`` pairs describing everything a run used."""
    items = [("kind", scenario.kind), ("name", scenario.name), ("seed", scenario.seed),
             ("samples", scenario.samples), ("workers", scenario.workers)]
    items += sorted(scenario.options.items())
    if link is not None:
        for key, (section, name) in LINK_KEYS.items():
            obj = link if section == "link" else getattr(link, section)
            items.append((key, getattr(obj, name)))
    return items
