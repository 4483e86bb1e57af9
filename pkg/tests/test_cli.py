import json
import subprocess
import sys

import numpy as np
import pytest

from passivemin import io
from passivemin.cli import main
from passivemin.minvalue import estimate_min_value
from passivemin.optimizer import Domain, Schedule


def _plan_file(tmp_path, n_grid=(8000,), sigma=0.0, reps=2):
    plan = {
        "scenario": {
            "objective": {"family": "quadratic", "alpha": 2.0, "d": 1},
            "domain": {"shape": "box", "lo": [-1.0], "hi": [1.0]},
            "density": {"family": "uniform-box"},
            "noise": {"family": "gaussian", "scale": sigma} if sigma else {"family": "none"},
        },
        "n_grid": list(n_grid), "replications": reps, "master_seed": 3,
        "targets": ["minimizer_l2", "minvalue_abs"],
    }
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(plan))
    return path


def _csv(tmp_path, rows, name="data.csv"):
    path = tmp_path / name
    path.write_text("x1,y\n" + "".join(f"{a},{b}\n" for a, b in rows))
    return path


def test_estimate_smoke(tmp_path, capsys):
    path = _csv(tmp_path, [(-0.5, 0.3), (0.1, 0.02), (0.4, 0.2), (0.0, 0.01)])
    assert main(["estimate", "--input", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert np.isfinite(out["f_hat"])
    assert out["n"] == 4 and out["m"] == 2
    assert {"beta", "alpha", "h_mn", "lambda_mn", "kernel"} <= set(out["params"])
    assert len(out["z_bar_m"]) == 1


def test_estimate_writes_output(tmp_path, capsys):
    path = _csv(tmp_path, [(-0.5, 0.3), (0.1, 0.02), (0.4, 0.2), (0.0, 0.01)])
    out = tmp_path / "est.json"
    assert main(["estimate", "--input", str(path), "--output", str(out)]) == 0
    assert "f_hat=" in capsys.readouterr().out
    text = out.read_text()
    assert io.dumps(json.loads(text)) == text


def test_bad_row_reported(tmp_path, capsys):
    rows = [(0.1 * i, 0.5) for i in range(10)]
    path = tmp_path / "bad.csv"
    lines = ["x1,y"] + [f"{a},{b}" for a, b in rows]
    lines[7] = "0.6,oops"
    path.write_text("\n".join(lines) + "\n")
    assert main(["estimate", "--input", str(path)]) == 2
    assert "row 7" in capsys.readouterr().err


def test_bad_header(tmp_path, capsys):
    path = tmp_path / "h.csv"
    path.write_text("a,b\n1,2\n")
    assert main(["estimate", "--input", str(path)]) == 2


def test_odd_rows(tmp_path, capsys):
    path = _csv(tmp_path, [(-0.5, 0.3), (0.1, 0.02), (0.4, 0.2)])
    assert main(["estimate", "--input", str(path)]) == 3
    assert "--drop-last" in capsys.readouterr().err
    assert main(["estimate", "--input", str(path), "--drop-last"]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 2


def test_domain_and_dim_checks(tmp_path, capsys):
    path = _csv(tmp_path, [(-0.5, 0.3), (0.1, 0.02)])
    assert main(["estimate", "--input", str(path), "--domain", "cube:1"]) == 2
    assert main(["estimate", "--input", str(path), "--dim", "2"]) == 2
    assert main(["estimate", "--input", str(path), "--domain", "ball:0.5"]) == 0


def test_estimate_matches_library(tmp_path, capsys):
    rng = np.random.default_rng(0)
    X = rng.uniform(-2, 2, size=(600, 1))
    y = X[:, 0] ** 2 + 0.1 * rng.normal(size=600)
    path = tmp_path / "obs.csv"
    io.write_observations(path, X, y)
    assert main(["estimate", "--input", str(path), "--alpha", "2", "--domain", "box:-1,1"]) == 0
    out = json.loads(capsys.readouterr().out)
    est = estimate_min_value(X, y, Schedule(2.0, 2.0, 1), Domain.box(-1, 1, d=1))
    assert out["f_hat"] == est.f_hat
    assert out["z_bar_m"] == est.z_stage1.tolist()


def test_simulate_minimal(tmp_path, capsys):
    plan = _plan_file(tmp_path, n_grid=(400,), sigma=0.3)
    out = tmp_path / "rep.json"
    assert main(["simulate", "--config", str(plan), "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len([r for r in rep["rows"] if r["target"] == "minimizer_l2"]) == 1
    assert (tmp_path / "rep.csv").exists()
    assert "no slope fitted" in capsys.readouterr().out


def test_simulate_prints_slopes(tmp_path, capsys):
    plan = _plan_file(tmp_path, n_grid=(200, 400, 800), sigma=0.3)
    assert main(["simulate", "--config", str(plan), "--output", str(tmp_path / "r.json")]) == 0
    text = capsys.readouterr().out
    assert "minimizer_l2: slope" in text and ("PASS" in text or "FAIL" in text)


def test_simulate_seed_determinism(tmp_path):
    plan = _plan_file(tmp_path, n_grid=(200, 400, 800), sigma=0.3)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["simulate", "--config", str(plan), "--master-seed", "7", "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()
    assert json.loads(a.read_text())["plan"]["master_seed"] == 7


def test_simulate_invalid_plan(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"n_grid": [10]}))
    assert main(["simulate", "--config", str(path)]) == 2
    path.write_text("{not json")
    assert main(["simulate", "--config", str(path)]) == 2


def test_emit_then_estimate_noiseless(tmp_path, capsys):
    plan = _plan_file(tmp_path)
    data = tmp_path / "obs.csv"
    assert main(["simulate", "--config", str(plan), "--output", str(tmp_path / "r.json"),
                 "--emit-data", str(data)]) == 0
    X, y = io.read_observations(data)
    assert X.shape == (8000, 1)
    capsys.readouterr()
    assert main(["estimate", "--input", str(data), "--alpha", "2", "--domain", "box:-1,1"]) == 0
    assert abs(json.loads(capsys.readouterr().out)["f_hat"]) < 1e-2


def test_inspect(capsys):
    assert main(["inspect", "--beta", "2", "--alpha", "1", "--dim", "1", "--k", "1,10"]) == 0
    text = capsys.readouterr().out
    assert "0.92931" in text
    assert "FAIL" not in text
    assert main(["inspect", "--dim", "2", "--k", "1"]) == 0
    assert "mass" in capsys.readouterr().out


def test_inspect_rejects_round_zero(capsys):
    assert main(["inspect", "--k", "0"]) == 2
    assert "positive" in capsys.readouterr().err


def test_rates(tmp_path, capsys):
    out = tmp_path / "rates.json"
    assert main(["rates", "--beta", "3", "--dim", "1", "--output", str(out)]) == 0
    assert "0.4286" in capsys.readouterr().out
    assert json.loads(out.read_text())["targets"]["minimizer_l2"] == pytest.approx(4 / 7)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "passivemin", "rates"], capture_output=True, text=True)
    assert res.returncode == 0 and "n^-0.4000" in res.stdout
