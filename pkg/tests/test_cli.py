import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from leoaoi.cli import OUTPUT_ENV, main, parse_latitudes
from leoaoi.config import parse_scenario
from leoaoi.errors import ConfigError


def small_scenario(tmp_path, **sweep):
    doc = yaml.safe_load(open(str(parse_scenario("starlink-20x20.scenario").source)))
    doc["simulation"]["horizon_s"] = 4000
    doc["target"] = {"latitude_deg": 30.0, "longitude_deg": -140.0}
    if sweep:
        doc["sweep"] = sweep
    p = tmp_path / "small.scenario"
    p.write_text(yaml.safe_dump(doc))
    return p


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv(OUTPUT_ENV, str(d))
    return d


def test_validate_ok_and_print(capsys):
    assert main(["validate", "starlink-20x20.scenario"]) == 0
    assert "ok" in capsys.readouterr().out
    assert main(["validate", "--print", "starlink-20x20.scenario"]) == 0
    assert "altitude_km: 550.0" in capsys.readouterr().out


def test_validate_bad_file_structured_error(tmp_path, capsys):
    p = tmp_path / "bad.scenario"
    p.write_text("constellation:\n  altitude_km: -1\n")
    assert main(["validate", str(p)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and "altitude_km" in err["message"]


def test_run_twice_identical(tmp_path, outdir, capsys):
    p = small_scenario(tmp_path)
    assert main(["run", str(p), "--seed", "7"]) == 0
    first = {f.name: f.read_bytes() for f in outdir.iterdir()}
    assert main(["run", str(p), "--seed", "7"]) == 0
    second = {f.name: f.read_bytes() for f in outdir.iterdir()}
    assert first == second and "ledger.csv" in first
    summary = json.loads(first["summary.json"])
    assert summary["seed"] == 7
    capsys.readouterr()


def test_sweep_writes_outputs(tmp_path, outdir, capsys):
    p = small_scenario(tmp_path, parameter="processing_satellites", values=[1, 5], runs=2)
    assert main(["sweep", str(p)]) == 0
    assert {f.name for f in outdir.iterdir()} == {"sweep.csv", "sweep.json", "sweep.svg"}
    lines = (outdir / "sweep.csv").read_text().strip().split("\n")
    assert len(lines) == 3
    capsys.readouterr()


def test_sweep_without_block_fails_cleanly(tmp_path, outdir, capsys):
    assert main(["sweep", str(small_scenario(tmp_path))]) == 2
    assert not outdir.exists() or not any(outdir.iterdir())
    capsys.readouterr()


def test_undefined_age_sweep_writes_nothing(tmp_path, outdir, capsys):
    # every run targets a point that is never covered, so no age is defined and
    # the CSV writer must refuse the NaN averages
    doc = yaml.safe_load(small_scenario(tmp_path, parameter="planes", values=[10], runs=2).read_text())
    doc["target"] = {"latitude_deg": 85.0, "longitude_deg": 0.0}
    doc["output"]["formats"] = ["json", "csv"]
    p = tmp_path / "never.scenario"
    p.write_text(yaml.safe_dump(doc))
    assert main(["sweep", str(p)]) == 1
    assert "NonFiniteError" in capsys.readouterr().err
    assert not outdir.exists() or not any(outdir.iterdir())


def test_failure_after_first_file_removes_it(tmp_path, outdir, capsys, monkeypatch):
    import leoaoi.cli as cli

    def broken_chart(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(cli, "sweep_chart", broken_chart)
    p = small_scenario(tmp_path, parameter="processing_satellites", values=[1], runs=2)
    assert main(["sweep", str(p)]) == 1
    assert "disk full" in capsys.readouterr().err
    assert outdir.exists() and not any(outdir.iterdir())


def test_coverage_command(tmp_path, outdir, capsys):
    assert main(["coverage", "planes-sweep.scenario", "--latitudes", "70:80:10",
                 "--longitudes", "2", "--step", "60"]) == 0
    text = (outdir / "coverage.csv").read_text().strip().split("\n")
    assert text[0] == "latitude_deg,M=10,M=15,M=20,M=25,M=30"
    assert text[2] == "80,0,0,0,0,0"
    capsys.readouterr()


def test_parse_latitudes():
    assert list(parse_latitudes("0:80:20")) == [0, 20, 40, 60, 80]
    with pytest.raises(ConfigError):
        parse_latitudes("0:80")
    with pytest.raises(ConfigError):
        parse_latitudes("10:0:5")


def test_module_entry_point(tmp_path):
    env = dict(os.environ, **{OUTPUT_ENV: str(tmp_path)})
    out = subprocess.run([sys.executable, "-m", "leoaoi", "validate", "starlink-20x20.scenario"],
                         capture_output=True, text=True, env=env, check=False)
    assert out.returncode == 0, out.stderr
    assert Path(tmp_path).exists()
