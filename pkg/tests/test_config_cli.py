import csv
import filecmp
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from dipolejet.cli import SUBCOMMANDS, main
from dipolejet.config import load_config
from dipolejet.errors import ConfigError

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
DISK_LINEAR = next(c for c in CONFIGS if c.name == "disk_linear.json")
ARTIFACTS = {
    "simulate": ["trajectory.csv"],
    "measure": ["measurements.csv"],
    "verify-su": ["su_residuals.csv", "su_summary.json"],
    "sample-r": ["sample_r.csv"],
    "recover-gradient": ["gradient.json"],
    "recover-jet": ["jet.json"],
    "reconstruct": ["grid.csv", "error.svg", "reconstruct_summary.json"],
    "verify-lemmas": ["lemmas.json"],
}


def write(tmp_path, text, name="cfg.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def test_defaults_and_sections(tmp_path):
    cfg = load_config(write(tmp_path, '{"domain": {"kind": "circle", "center": [0, 1], "radius": 1}, "potential": {"kind": "zero"}}'))
    assert cfg.sigma == 0.1 and cfg.jet_order == 2 and cfg.ode_tol == 1e-12
    assert cfg.section("su")["n_cases"] == 96
    assert list(cfg.boundary_point()) == pytest.approx([0.0, 0.0], abs=1e-15)


@pytest.mark.parametrize("text,line,word", [
    ('{\n  "potential": {"kind": "zero"}\n}', 1, "domain"),
    ('{\n  "domain": {"kind": "circle", "center": [0, 1], "radius": 1},\n  "potential": {"kind": "zero"},\n  "colour": 3\n}', 4, "colour"),
    ('{\n  "domain": {"kind": "circle", "center": [0, 1], "radius": 1},\n  "potential": {"kind": "zero"},\n  "ode_tol": 1e-3\n}', 4, "ode_tol"),
    ('{\n  "domain": {"kind": "circle", "center": [0, 1], "radius": 1},\n  "potential": {"kind": "zero"},\n  "sigma": 0\n}', 4, "sigma"),
    ('{\n  "domain": {"kind": "circle", "center": [0, 1], "radius": 1},\n  "potential": {"kind": "zero"},\n  "jet_order": 4\n}', 4, "jet_order"),
    ('{\n  "domain": {"kind": "circle", "center": [0, 1], "radius": 1},\n  "potential": {"kind": "zero"},\n  "su": {"n": 3}\n}', 4, "'n'"),
    ('{\n  "domain": {"kind": "circle", "center": [0, 1], "radius": 1},\n  "potential": {"kind": "zero"},\n}', 4, "invalid JSON"),
])
def test_validation_messages(tmp_path, text, line, word):
    with pytest.raises(ConfigError) as info:
        load_config(write(tmp_path, text))
    msg = str(info.value)
    assert msg.startswith(f"line {line}:") and word in msg


def test_missing_domain_exit_code(tmp_path, capsys):
    path = write(tmp_path, '{"potential": {"kind": "zero"}}')
    assert main(["verify-su", "--config", path, "--out", str(tmp_path / "o")]) == 1
    assert "domain" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert main(["nonsense", "--config", str(DISK_LINEAR)]) == 1
    assert main(["simulate"]) == 1
    assert main(["simulate", "--config", str(tmp_path / "absent.json")]) == 1
    assert main(["simulate", "--config", str(DISK_LINEAR), "--seed", "-1"]) == 1


def test_verify_su_bundled(tmp_path):
    assert main(["verify-su", "--config", str(DISK_LINEAR), "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "su_residuals.csv")
    assert r[0] == ["x1", "x2", "y1", "y2", "ell", "residual", "error"]
    assert len(r) == 97 and max(float(x[5]) for x in r[1:]) < 1e-6
    summary = json.loads((tmp_path / "su_summary.json").read_text())
    assert summary["n_failed"] == 0


def test_recover_gradient_bundled(tmp_path):
    assert main(["recover-gradient", "--config", str(DISK_LINEAR), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "gradient.json").read_text())
    for key, want in (("1,0", 0.1), ("0,1", 0.2)):
        assert abs(rep["values"][key] - want) <= rep["uncertainties"][key] + 1e-12
    assert rep["diagnostics"]["ell_prime"] > 0 and rep["diagnostics"]["convexity"] < 0
    assert len(rep["field"]) == 5 and all("gradient" in f for f in rep["field"])


def test_failed_point_reports_and_exits_2(tmp_path):
    cfg = json.loads(DISK_LINEAR.read_text())
    cfg["point"] = [0.0, 2.0]  # not convex with respect to this Q
    path = write(tmp_path, json.dumps(cfg))
    assert main(["recover-jet", "--config", path, "--out", str(tmp_path)]) == 2
    assert "IllConditioned" in json.loads((tmp_path / "jet.json").read_text())["error"]


def test_csv_headers(tmp_path):
    out = str(tmp_path)
    main(["simulate", "--config", str(DISK_LINEAR), "--out", out])
    main(["measure", "--config", str(DISK_LINEAR), "--out", out])
    main(["sample-r", "--config", str(DISK_LINEAR), "--out", out])
    assert rows(tmp_path / "trajectory.csv")[0] == ["s", "a+x", "a+y", "a-x", "a-y"]
    assert rows(tmp_path / "measurements.csv")[0] == ["x1", "x2", "y1", "y2", "tau", "exit1", "exit2", "comp1", "comp2", "branch"]
    assert rows(tmp_path / "sample_r.csv")[0] == ["t", "ell", "R1", "R2", "R3", "R4"]


@pytest.mark.parametrize("config", CONFIGS, ids=[c.stem for c in CONFIGS])
def test_bundled_configs_run_and_are_deterministic(tmp_path, config):
    a, b = tmp_path / "a", tmp_path / "b"
    for sub in SUBCOMMANDS:
        assert main([sub, "--config", str(config), "--out", str(a)]) == 0, sub
        assert main([sub, "--config", str(config), "--out", str(b), "--threads", "2"]) == 0, sub
        for name in ARTIFACTS[sub]:
            assert filecmp.cmp(a / name, b / name, shallow=False), name


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ)
    r = subprocess.run([sys.executable, "-m", "dipolejet.cli", "simulate", "--config", str(DISK_LINEAR), "--out", str(tmp_path)],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and (tmp_path / "trajectory.csv").exists()
