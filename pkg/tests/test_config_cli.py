import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from heraldkit import cli
from heraldkit.config import ConfigError, build_fiber, load_config, parse_config
from heraldkit.dispersion import FUSED_SILICA

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
REFERENCE = json.loads((CONFIGS / "reference.json").read_text())


def with_changes(base: dict, **sections) -> dict:
    cfg = json.loads(json.dumps(base))
    for key, value in sections.items():
        if value is None:
            cfg.pop(key, None)
        elif isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return cfg


@pytest.fixture
def run(tmp_path):
    def _run(cfg, command, *extra, out="out"):
        path = tmp_path / f"cfg_{command}_{out}.json"
        path.write_text(json.dumps(cfg))
        code = cli.main([command, "--config", str(path), "--out", str(tmp_path / out), *extra])
        return code, tmp_path / out

    return _run


def test_shipped_configs_parse():
    for p in CONFIGS.glob("*.json"):
        assert load_config(p).schema_version == 1


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match=r"pump\.colour"):
        parse_config(with_changes(REFERENCE, pump={"colour": "red"}))


def test_missing_key_reports_path():
    cfg = with_changes(REFERENCE)
    del cfg["fiber"]["length_m"]
    with pytest.raises(ConfigError, match=r"fiber\.length_m"):
        parse_config(cfg)


def test_schema_version_checked():
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(with_changes(REFERENCE, schema_version=2))


def test_birefringence_source_exclusive():
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(with_changes(REFERENCE, fiber={"delta_n": 4e-4}))


def test_custom_sellmeier_and_explicit_delta_n():
    cfg = with_changes(
        REFERENCE,
        fiber={
            "sellmeier": {"b": list(FUSED_SILICA.b), "c_um2": list(FUSED_SILICA.c)},
            "calibration": None,
            "delta_n": 4.2e-4,
        },
    )
    cfg["fiber"] = {k: v for k, v in cfg["fiber"].items() if v is not None}
    fiber = build_fiber(parse_config(cfg).fiber)
    assert fiber.delta_n == 4.2e-4
    assert fiber.base.index(0.715) == pytest.approx(FUSED_SILICA.index(0.715), rel=1e-15)


def test_unknown_sellmeier_name():
    with pytest.raises(ConfigError, match="unknown model"):
        build_fiber(parse_config(with_changes(REFERENCE, fiber={"sellmeier": "unobtainium"})).fiber)


def test_require_missing_section():
    with pytest.raises(ConfigError, match="missing config key: hom"):
        parse_config(with_changes(REFERENCE, hom=None)).require("hom")


def test_task_seeds_distinct_and_stable():
    a, b = cli.task_seed(1, "hom"), cli.task_seed(1, "rates")
    assert a != b
    assert a == cli.task_seed(1, "hom")
    assert cli.task_seed(2, "hom") != a


def test_calibrate(run, capsys):
    code, out = run(REFERENCE, "calibrate")
    assert code == 0
    rec = json.loads((out / "calibration.json").read_text())
    assert rec["delta_n"] == pytest.approx(4.2193183191475e-4, rel=1e-9)
    assert rec["roundtrip_deviation_nm"] < 0.5
    assert rec["gvm_regime"] == "pump_between"
    assert "delta_n=4.219318e-04" in capsys.readouterr().out


def test_calibrate_inconsistent_triple(run, capsys):
    cfg = with_changes(REFERENCE, fiber={"calibration": {"pump_nm": 715.0, "signal_nm": 600.0, "idler_nm": 848.0}})
    code, out = run(cfg, "calibrate")
    assert code == 2
    assert "energy conservation" in capsys.readouterr().err
    assert not (out / "calibration.json").exists()


def test_calibrate_round_trip_failure_removes_files(run):
    # 0.8 nm off in signal: accepted by the projection, rejected by the round trip
    cfg = with_changes(REFERENCE, fiber={"calibration": {"pump_nm": 715.0, "signal_nm": 618.86, "idler_nm": 848.0}})
    code, out = run(cfg, "calibrate")
    assert code == 2
    assert list(out.iterdir()) == []


def test_missing_key_exit_code(run, capsys):
    cfg = with_changes(REFERENCE)
    del cfg["fiber"]["length_m"]
    code, _ = run(cfg, "calibrate")
    assert code == 1
    assert "fiber.length_m" in capsys.readouterr().err


def test_missing_section_exit_code(run, capsys):
    code, _ = run(with_changes(REFERENCE, rates=None), "rates")
    assert code == 1
    assert "rates" in capsys.readouterr().err


def test_bad_seed_exit_code(run):
    assert run(REFERENCE, "rates", "--seed", "-1")[0] == 1


def test_numerical_exit_code(run, capsys):
    code, _ = run(with_changes(REFERENCE, grid={"n_signal": 64, "n_idler": 64, "span_factor": 40.0}), "purity")
    assert code == 3
    assert "GridTooCoarse" in capsys.readouterr().err


def test_purity_summary(run, capsys):
    code, out = run(REFERENCE, "purity")
    assert code == 0
    line = capsys.readouterr().out
    purity = float(line.split("purity=")[1].split()[0])
    assert 0.70 <= purity <= 0.85
    assert (out / "schmidt.csv").exists()


def test_filtered_purity_summary(run, capsys):
    cfg = json.loads((CONFIGS / "reference_filtered.json").read_text())
    assert run(cfg, "purity")[0] == 0
    assert float(capsys.readouterr().out.split("filtered_purity=")[1].split()[0]) >= 0.84


def test_rates_summary(run, capsys):
    code, out = run(with_changes(REFERENCE, rates={"monte_carlo": None}), "rates")
    assert code == 0
    fields = dict(kv.split("=") for kv in capsys.readouterr().out.split())
    assert float(fields["eta_h"]) == pytest.approx(0.847)
    assert float(fields["overall"]) == pytest.approx(0.322)
    assert float(fields["P_h"]) == pytest.approx(9.2e-4)


def test_hom_deterministic(run):
    a = run(REFERENCE, "hom", out="a")[1]
    b = run(REFERENCE, "hom", out="b")[1]
    c = run(REFERENCE, "hom", "--seed", "7", out="c")[1]
    for name in ("hom_scan.csv", "hom.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "hom_scan.csv").read_bytes() != (c / "hom_scan.csv").read_bytes()
    rec = json.loads((a / "hom.json").read_text())
    assert rec["visibility"] == pytest.approx(rec["purity_a"], abs=1e-6)
    assert rec["visibility_with_background"] < rec["visibility"]


def test_rates_monte_carlo_deterministic(run):
    cfg = with_changes(REFERENCE, rates={"monte_carlo": {"duration_s": 0.2}})
    a = run(cfg, "rates", out="a")[1]
    b = run(cfg, "rates", out="b")[1]
    assert (a / "rates.json").read_bytes() == (b / "rates.json").read_bytes()
    g2 = json.loads((a / "rates.json").read_text())["monte_carlo"]["g2"]
    assert 0 <= g2 < 0.1


def test_jsa_outputs(run):
    cfg = with_changes(REFERENCE, grid={"n_signal": 128, "n_idler": 128})
    code, out = run(cfg, "jsa", "--format", "json")
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "jsa.bin",
        "jsa_summary.json",
        "marginal_idler.json",
        "marginal_signal.json",
    ]
    assert (out / "jsa.bin").stat().st_size == 24 + 16 * 128 + 16 * 128 * 128


def test_tune_outputs(run):
    cfg = with_changes(REFERENCE, tune={"steps": 5, "filter_widths_nm": [2.0, 0.5]})
    code, out = run(cfg, "tune")
    assert code == 0
    rows = np.loadtxt(out / "pressure_scan.csv", delimiter=",", skiprows=1)
    assert rows[-1, 1] - rows[0, 1] == pytest.approx(0.2, rel=1e-3)
    assert np.argmax(rows[:, 2]) == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "heraldkit", "calibrate", "--config", str(CONFIGS / "reference.json"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("delta_n=")


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert "heraldkit" in capsys.readouterr().out
