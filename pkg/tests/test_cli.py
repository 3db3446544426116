import csv
import io

import pytest

from cvpnp.cli import main
from cvpnp.config import apply_link_overrides, load_scenario, parse_config_text
from cvpnp.errors import ConfigError
from cvpnp.link import LinkConfig


def read(path):
    text = path.read_text(encoding="utf-8")
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    meta = dict(ln[2:].split("=", 1) for ln in text.splitlines() if ln.startswith("# "))
    return list(csv.DictReader(io.StringIO("\n".join(body)))), meta


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


class TestConfigParsing:
    def test_values(self):
        e = parse_config_text("seed = 1\nintensities = 9, 3\n# note\n\nmirror = ordinary")
        assert e["seed"] == (1, 1)
        assert e["intensities"] == ([9.0, 3.0], 2)
        assert e["mirror"] == ("ordinary", 5)

    @pytest.mark.parametrize("text, line", [
        ("seed = 1\nbogus = 2", 2),
        ("seed = 1\n\nnot a pair", 3),
        ("seed = 1\nseed = 2", 2),
        ("intensities = 1, x", 1),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ConfigError) as exc:
            parse_config_text(text)
        assert exc.value.line == line
        assert str(exc.value).startswith(f"line {line}:")

    def test_override_validation_line(self):
        s = load_scenario("sweep", "seed = 3\nfiber_length = 14\nrep_rate = 50000")
        with pytest.raises(ConfigError) as exc:
            apply_link_overrides(LinkConfig(), s.link_overrides)
        assert exc.value.line == 3

    def test_cli_wins(self):
        s = load_scenario("sweep", "seed = 3\nworkers = 2", seed=9)
        assert (s.seed, s.workers) == (9, 2)

    def test_bad_seed(self):
        with pytest.raises(ConfigError):
            load_scenario("sweep", "seed = -1")


class TestRuns:
    def test_calibrate_roundtrip(self, tmp_path):
        assert run(tmp_path, "calibrate", "--seed", "1") == 0
        rows, meta = read(tmp_path / "calibrate.csv")
        assert len(rows) == 10
        assert float(rows[0]["fit_v_electr"]) == pytest.approx(float(meta["configured_v_electr"]), rel=0.02)
        assert float(rows[0]["fit_a"]) == pytest.approx(float(meta["configured_a"]), rel=0.02)
        assert meta["version"]

    def test_keyrate_rows(self, tmp_path):
        assert run(tmp_path, "keyrate") == 0
        rows, _ = read(tmp_path / "keyrate.csv")
        head = [r for r in rows if r["mode"] == "realistic" and r["va_interpretation"] == "mean"
                and r["v_el_source"] == "measured_total"]
        assert len(head) == 2
        low, high = sorted(head, key=lambda r: float(r["loss_db"]))
        assert 0.44 <= float(low["delta_I"]) <= 0.82
        assert 0.126 <= float(high["delta_I"]) <= 0.234
        for r in rows:
            assert float(r["bits_per_second"]) == pytest.approx(float(r["delta_I"]) * float(r["rep_rate_hz"]))

    def test_rate_limit(self, tmp_path):
        cfg = tmp_path / "rl.conf"
        cfg.write_text("fiber_lengths = 0, 14\nrep_rates = 6700, 50000\n")
        assert run(tmp_path, "rate-limit", "--config", str(cfg), "--samples", "5000") == 0
        rows, meta = read(tmp_path / "rate_limit.csv")
        limits = [r for r in rows if r["row"] == "limit"]
        assert float(limits[0]["max_rate_hz"]) == pytest.approx(200e3)
        assert float(limits[1]["max_rate_hz"]) == pytest.approx(7142.857, abs=1e-3)
        noise = [float(r["variance"]) for r in rows if r["row"] == "noise"]
        assert noise[1] > noise[0]
        assert meta["fiber_length"] == "14.0"

    def test_sweep_metadata(self, tmp_path):
        cfg = tmp_path / "s.conf"
        cfg.write_text("name = small\nintensities = 9, 1\n")
        assert run(tmp_path, "sweep", "--config", str(cfg), "--samples", "200") == 0
        rows, meta = read(tmp_path / "small.csv")
        assert len(rows) == 34
        assert meta["kind"] == "sweep"
        assert meta["samples"] == "200"
        assert "lo_photons" in meta and "timing_offset_sigma" in meta

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["sweep", "--seed", "5", "--samples", "200", "--out", str(d)]) == 0
        assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()

    def test_workers_equal(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["stability", "--samples", "200", "--workers", "1", "--out", str(a)]) == 0
        assert main(["stability", "--samples", "200", "--workers", "4", "--out", str(b)]) == 0
        ra, ma = read(a / "stability.csv")
        rb, mb = read(b / "stability.csv")
        assert ra == rb
        assert ma["reproducibility"] == mb["reproducibility"]


class TestExitCodes:
    def test_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.conf"
        cfg.write_text("seed = 1\nrep_rate = fast\n")
        assert run(tmp_path, "sweep", "--config", str(cfg)) == 1
        err = capsys.readouterr().err
        assert "line 2" in err

    def test_missing_config(self, tmp_path):
        assert run(tmp_path, "sweep", "--config", str(tmp_path / "nope.conf")) == 1

    def test_unknown_command(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["launch"])
        assert exc.value.code == 1

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["keyrate", "--out", str(blocker / "sub")]) == 2

    def test_unreachable_setpoint_is_runtime_error(self, tmp_path):
        cfg = tmp_path / "s.conf"
        cfg.write_text("intensities = 50, 1\n")
        assert run(tmp_path, "sweep", "--config", str(cfg), "--samples", "100") == 2
