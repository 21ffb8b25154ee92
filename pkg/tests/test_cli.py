import json
import math
from pathlib import Path

import pytest

from rydparity import cli, config as cfgmod
from rydparity.model import mhz

DATA = Path(cfgmod.__file__).parent / "data"


@pytest.mark.parametrize("data,expected", [
    # oracle: `git hash-object --stdin`
    (b"hello\n", "ce013625030ba8dba906f756967f9e9ca394464a"),
    (b"", "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"),
])
def test_git_blob_hash(data, expected):
    assert cli.git_blob_sha1(data) == expected


@pytest.mark.parametrize("name", cfgmod.shipped_names())
def test_shipped_configs_validate_and_name_one_criterion(name):
    raw = json.loads((DATA / name).read_text())
    cfgmod.validate(raw)
    assert isinstance(raw["criterion"], int) and 1 <= raw["criterion"] <= 14


def test_times_2pi_convention():
    on = cfgmod.from_dict({"system": {"omega_c_mhz": 3.0}})
    off = cfgmod.from_dict({"times_2pi": False, "system": {"omega_c_mhz": 3.0}})
    assert on.system().omega_c == pytest.approx(mhz(3.0))
    assert off.system().omega_c == pytest.approx(3.0)


def test_config_builds_model_objects():
    rc = cfgmod.from_dict({"gate": {"parity": "odd", "gamma_pi": 0.5},
                           "noise": {"channels": ["phase"]}, "decay": {"enabled": True}})
    assert rc.system().parity == "odd"
    assert rc.pulse().gamma == pytest.approx(math.pi / 2)
    spec = rc.noise_spec()
    assert spec.phase and not spec.position and not spec.amplitude
    assert rc.decay().gamma_d == pytest.approx(1 / 508.0)


@pytest.mark.parametrize("raw,field", [
    ({"system": {"omega_c_mhz": -1}}, "system.omega_c_mhz"),
    ({"system": {"bogus": 1}}, "system"),
    ({"noise": {"channels": ["wind"]}}, "noise.channels.0"),
    ({"schema_version": 2}, "schema_version"),
    ({"gate": {"parity": "both"}}, "gate.parity"),
])
def test_schema_errors_name_the_field(raw, field):
    with pytest.raises(cfgmod.ConfigError) as info:
        cfgmod.from_dict(raw)
    assert f"{field}:" in str(info.value)


def test_cli_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1, "pulse": {"alpha": 0}}')
    assert cli.run(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "pulse.alpha" in capsys.readouterr().err


def test_cli_rejects_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_codes_error_x2(tmp_path, capsys):
    assert cli.run(["codes", "--error", "X2", "--out", str(tmp_path)]) == 0
    assert "X2 syndrome -1" in capsys.readouterr().out
    rows = (tmp_path / "syndromes.csv").read_text().splitlines()
    assert rows[0].startswith("# rydparity output schema")
    assert rows[2].split(",")[:3] == ["X2", "Z1Z2Z3-parity", "-1"]


def test_codes_xzzx_config(tmp_path, capsys):
    assert cli.run(["codes", "--config", str(DATA / "codes_xzzx.json"),
                    "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    flagged = {r["check"] for r in summary["rows"] if r["error"] == "X5" and r["syndrome"] == -1}
    assert flagged == {"Z1X2X4Z5", "Z5X6X8Z9"}


def _read_all(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_outputs_embed_manifest_hash(tmp_path):
    assert cli.run(["validate-effective", "--config", str(DATA / "vdw_constants.json"),
                    "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["manifest_hash"]) == 40
    assert report["manifest"]["config_hash"] == cli.git_blob_sha1(
        (DATA / "vdw_constants.json").read_bytes())
    assert report["vdw"]["V13_D_mhz"] == pytest.approx(-66.978, rel=5e-5)


@pytest.mark.slow
def test_ensemble_rerun_byte_identical_across_threads(tmp_path):
    cfg = tmp_path / "ens.json"
    cfg.write_text(json.dumps({"schema_version": 1, "system": {"omega_c_mhz": 5.0},
                               "pulse": {"omega_f_mhz": 0.248, "alpha": 42.76},
                               "noise": {"channels": ["position", "phase"], "shots": 2}}))
    args = ["ensemble", "--config", str(cfg), "--out", str(tmp_path / "out"), "--curves"]
    assert cli.run(args + ["--threads", "1"]) == 0
    first = _read_all(tmp_path / "out")
    assert cli.run(args + ["--threads", "2"]) == 0
    assert _read_all(tmp_path / "out") == first
    assert {"shots.csv", "curves.csv", "summary.json", "shots.gp"} <= set(first)


def test_overrides_recorded(tmp_path):
    assert cli.run(["codes", "--seed", "5", "--no-vdw", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["manifest"]["overrides"] == {"seed": "5", "vdw": "false"}


def test_thread_env_default(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli.default_threads() == 3
    monkeypatch.setenv(cli.THREADS_ENV, "x")
    with pytest.raises(SystemExit):
        cli.default_threads()
