"""CLI tests: flags, exit codes, reproducible outputs."""

import json
import hashlib
import os

import pytest

from lpwansim.cli import main
from lpwansim.metrics import SUMMARY_COLUMNS
from lpwansim.scenario import ScenarioConfig


@pytest.fixture(scope="module")
def tiny_config(tmp_path_factory):
    # deliberately tiny so calibration pilots and campaigns stay fast
    cfg = ScenarioConfig(n_stationary=12, n_wearable=18, n_vehicles=16,
                         n_pedestrians=18, rat="NBIOT", rounds=2,
                         sim_duration_s=15.0, seed=3)
    path = tmp_path_factory.mktemp("cfg") / "tiny.json"
    path.write_text(json.dumps(cfg.to_dict()))
    return str(path)


def _digest(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_calibrate_only(tiny_config, tmp_path, capsys):
    rc = main(["--config", tiny_config, "--out", str(tmp_path), "--calibrate-only"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.startswith("calibrated_distance_m=")
    assert not (tmp_path / "summary.csv").exists()


def test_sweep_rows_and_manifest(tiny_config, tmp_path):
    out = tmp_path / "run"
    rc = main(["--config", tiny_config, "--out", str(out),
               "--involvement", "type1", "--vehicles", "0", "--vehicles", "4",
               "--vehicles", "8", "--emit-snapshot"])
    assert rc == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == ",".join(SUMMARY_COLUMNS)
    rows = [l.split(",") for l in lines[1:]]
    assert len([r for r in rows if r[1] == "TYPE1"]) == 3
    assert len([r for r in rows if r[1] == "BASELINE"]) == 1
    # baseline anchored at exactly 1.0
    base_row = next(r for r in rows if r[1] == "BASELINE")
    assert float(base_row[6]) == 1.0
    type1_zero = next(r for r in rows if r[1] == "TYPE1" and r[2] == "0")
    assert float(type1_zero[6]) == 1.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["rat"] == "NBIOT"
    assert manifest["sweep"] == [0, 4, 8]
    assert "config_hash" in manifest and "bs_distance_m" in manifest
    snap = (out / "snapshot.csv").read_text().splitlines()
    assert snap[0] == "node_id,kind,x_m,y_m,z_m"
    assert (out / "diagnostics.csv").exists()


def test_byte_identical_reruns(tiny_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["--config", tiny_config, "--involvement", "type2",
            "--vehicles", "0", "--vehicles", "5", "--export-logs"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert _digest(a / "summary.csv") == _digest(b / "summary.csv")
    assert _digest(a / "diagnostics.csv") == _digest(b / "diagnostics.csv")
    assert _digest(a / "manifest.json") == _digest(b / "manifest.json")
    for d in sorted(os.listdir(a / "logs")):
        for f in sorted(os.listdir(a / "logs" / d)):
            assert _digest(a / "logs" / d / f) == _digest(b / "logs" / d / f)


def test_exit_code_usage_error(tmp_path):
    assert main(["--config"]) == 2
    assert main(["--nonsense"]) == 2


def test_exit_code_unreadable_config(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert err.startswith("error:config-unreadable:")
    assert len(err.strip().splitlines()) == 1

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "--out", str(tmp_path)]) == 3


def test_exit_code_invariant_violation(tmp_path, capsys):
    cfg = ScenarioConfig().to_dict()
    cfg["area_m"] = [999.0, 1050.0]
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["--config", str(path), "--out", str(tmp_path)]) == 4
    err = capsys.readouterr().err
    assert err.startswith("error:config-invalid:")

    cfg2 = ScenarioConfig().to_dict()
    cfg2["typo_key"] = 1
    path.write_text(json.dumps(cfg2))
    assert main(["--config", str(path), "--out", str(tmp_path)]) == 4


def test_sweep_bounds_checked(tiny_config, tmp_path, capsys):
    rc = main(["--config", tiny_config, "--out", str(tmp_path),
               "--vehicles", "9999"])
    assert rc == 4
