import io
import json

import pytest

from cxproj import cli
from cxproj.measures import load, measure, save


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(map(str, argv)), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, m in {
        "d0": measure([[0.0]]),
        "d3": measure([[3.0]]),
        "pm": measure([[-1.0], [1.0]]),
        "pm2": measure([[-2.0], [2.0]]),
    }.items():
        paths[name] = tmp_path / f"{name}.json"
        save(m, paths[name])
    return paths


def test_format_sci():
    assert cli.format_sci(3.0) == "3.0000000000000000e0"
    assert cli.format_sci(0.00125) == "1.2500000000000000e-3"
    assert float(cli.format_sci(0.1)) == 0.1


def test_w2(files):
    assert run("w2", files["d0"], files["d3"]) == (0, "3.0000000000000000e0\n", "")


def test_check_order(files, tmp_path):
    code, out, _ = run("check-order", files["pm"], files["d0"])
    assert (code, out) == (0, "NotDominated\n")
    cert = tmp_path / "cert.json"
    code, out, _ = run("check-order", files["pm"], files["pm2"], "--certificate", cert)
    assert (code, out) == (0, "Dominated\n")
    doc = json.loads(cert.read_text())
    assert doc["schema"] == "coupling/1"
    assert len(doc["plan"]) == 2
    code, _, _ = run("check-order", files["pm"], files["d0"], "--certificate", cert)
    assert json.loads(cert.read_text())["gap"] > 0


def test_projections_and_extrapolation(files, tmp_path):
    out = tmp_path / "o.json"
    code, text, _ = run("project-backward", files["d3"], files["pm"], "--out", out)
    assert code == 0 and text.startswith("objective 9.0000000000000000e0")
    assert load(out).atoms.tolist() == [[0.0]]
    code, _, _ = run("project-forward", files["pm"], files["d0"], "--out", out, "--t", 3)
    assert code == 0 and sorted(load(out).atoms.ravel().tolist()) == [-1.0, 1.0]
    code, _, _ = run("extrapolate", files["d0"], files["d3"], "--t", 2, "--out", out)
    assert code == 0 and load(out).atoms.tolist() == [[6.0]]


def test_identical_invocations_identical_files(files, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("project-backward", files["pm2"], files["pm"], "--out", a)
    run("project-backward", files["pm2"], files["pm"], "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_nonconvergence_exit_code(tmp_path):
    import numpy as np

    rng = np.random.default_rng(3)
    mu = tmp_path / "mu.json"
    nu = tmp_path / "nu.json"
    save(measure(rng.uniform(-1, 1, (8, 2)), rng.dirichlet(np.ones(8))), mu)
    save(measure(rng.uniform(-1, 1, (8, 2)), rng.dirichlet(np.ones(8))), nu)
    code, _, _ = run("project-backward", mu, nu, "--out", tmp_path / "o.json", "--max-iters", 1, "--fw-gap", 1e-300)
    assert code == 3


def test_usage_and_input_errors(files, tmp_path):
    assert run("bogus")[0] == 1
    assert run("w2", files["d0"])[0] == 1
    assert run("extrapolate", files["d0"], files["d3"], "--out", tmp_path / "x.json")[0] == 1
    assert run("w2", tmp_path / "missing.json", files["d0"])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "dmeasure/1", "dim": 1, "atoms": [[0]], "weights": ["x"]}')
    code, _, err = run("w2", bad, files["d0"])
    assert code == 2 and "weights[0]" in err
    assert run("extrapolate", files["d0"], files["d3"], "--t", 1, "--out", tmp_path / "x.json")[0] == 2


def test_stability_suite(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 1, "holder_instances": 2, "atoms": [1, 3]}))
    code, out, _ = run("stability-suite", "--config", cfg, "--out-dir", tmp_path / "rep")
    assert code == 0
    assert (tmp_path / "rep" / "report.csv").exists()
    assert json.loads((tmp_path / "rep" / "summary.json").read_text())["suite_pass"]
    assert "NONEXPANSIVE ok" in out
    cfg.write_text(json.dumps({"trials": 0}))
    assert run("stability-suite", "--config", cfg, "--out-dir", tmp_path / "r2")[0] == 2


def test_module_entry_point(files):
    import subprocess
    import sys

    res = subprocess.run(
        [sys.executable, "-m", "cxproj", "w2", str(files["d0"]), str(files["d3"])],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout == "3.0000000000000000e0\n"
