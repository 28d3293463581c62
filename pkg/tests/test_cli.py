import json
import subprocess
import sys

import numpy as np
import pytest

from extremal_branch.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, EXIT_STALL, main, parse_dims

GELFAND = """\
model.kind = euclidean
model.dimension = 2
model.radius = 1
nonlinearity.kind = gelfand
grid.points = 256
"""


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _run(tmp_path, command, text, out="out", extra=()):
    cfg = _cfg(tmp_path, text)
    target = tmp_path / out
    code = main([command, "--config", cfg, "--out", str(target), *extra])
    return code, target


def test_branch_summary(tmp_path):
    code, out = _run(tmp_path, "branch", GELFAND)
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["lambda_star"] == pytest.approx(2.0, abs=2e-3)
    # past the fold the planar profile concentrates until the step underflows
    assert summary["termination"] in ("fold-passed-and-ceiling", "blow-up-detected")
    assert summary["fold"]["mu1"] == pytest.approx(0.0, abs=1e-3 * summary["lambda1"])
    lines = (out / "branch.csv").read_text().splitlines()
    assert lines[0] == "s,lambda,u0,sup_u,mu1,stable"
    assert len(lines) == summary["points"] + 1


def test_outputs_are_deterministic(tmp_path):
    _, a = _run(tmp_path, "branch", GELFAND, "a")
    _, b = _run(tmp_path, "branch", GELFAND, "b")
    for name in ("branch.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_profiles_written(tmp_path):
    code, out = _run(tmp_path, "branch", GELFAND + "output.points = true\n")
    assert code == EXIT_OK
    assert (out / "point_0.csv").read_text().startswith("r,u\n")


def test_missing_config_names_path(tmp_path):
    missing = tmp_path / "nope.cfg"
    proc = subprocess.run([sys.executable, "-m", "extremal_branch.cli", "branch", "--config",
                           str(missing), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_CONFIG
    assert str(missing) in proc.stderr


@pytest.mark.parametrize("text", [
    GELFAND + "model.colour = red\n",
    GELFAND + "grid.points = many\n",
    GELFAND.replace("gelfand", "cubic"),
    "just some words\n",
])
def test_bad_config(tmp_path, text):
    code, _ = _run(tmp_path, "branch", text)
    assert code == EXIT_CONFIG


def test_stall_exit(tmp_path):
    code, _ = _run(tmp_path, "branch", GELFAND + "continuation.max_steps = 1\n")
    assert code == EXIT_STALL


def test_bounds(tmp_path):
    code, out = _run(tmp_path, "bounds", GELFAND)
    assert code == EXIT_OK
    data = json.loads((out / "bounds.json").read_text())
    assert data["sandwich_ok"] is True
    assert data["lower"] < 2 < data["upper"]


def test_verify_branch(tmp_path):
    code, out = _run(tmp_path, "verify", GELFAND + "verify.t = 0.5, 1, 1.5\n")
    assert code == EXIT_OK
    reports = json.loads((out / "estimates.json").read_text())
    ids = {r["lemma_id"] for r in reports}
    assert {"L39", "L45", "T06", "T22ii"} <= ids
    assert all(r["satisfied"] for r in reports if r["lemma_id"] != "T06")
    assert set(reports[0]) == {"lemma_id", "params", "lhs", "rhs", "margin", "satisfied",
                               "lambda", "mu1"}


def test_verify_post_fold_request_is_empty(tmp_path, caplog):
    text = GELFAND + "verify.lambda = 1.8\nverify.segment = second\n"
    code, out = _run(tmp_path, "verify", text)
    assert code == EXIT_OK
    assert json.loads((out / "estimates.json").read_text()) == []
    assert "not semi-stable" in caplog.text


def test_verify_solution_file(tmp_path):
    code, out = _run(tmp_path, "branch", GELFAND + "output.points = true\n")
    assert code == EXIT_OK
    text = GELFAND + f"verify.solution = {out / 'point_3.csv'}\n"
    lam = float((out / "branch.csv").read_text().splitlines()[4].split(",")[1])
    code, out2 = _run(tmp_path, "verify", text + f"verify.lambda = {lam!r}\n", "v")
    assert code == EXIT_OK
    assert len(json.loads((out2 / "estimates.json").read_text())) > 0

    bad = tmp_path / "bad.csv"
    bad.write_text("r,u\n0,zzz\n")
    code, _ = _run(tmp_path, "verify", GELFAND + f"verify.solution = {bad}\n"
                   "verify.lambda = 1\n", "v2")
    assert code == EXIT_CONFIG


def test_verify_failure_exit(tmp_path):
    # a profile that is not a solution at the stated lambda breaks the bound
    rows = ["r,u"] + [f"{float(r)!r},{30 * (1 - float(r))!r}" for r in np.linspace(0, 1, 257)]
    prof = tmp_path / "fake.csv"
    prof.write_text("\n".join(rows) + "\n")
    text = GELFAND + f"verify.solution = {prof}\nverify.lambda = 0\nverify.t = 1\n" \
        "tol.eig = 1e9\n"
    code, _ = _run(tmp_path, "verify", text)
    assert code == EXIT_FAILED


def test_sweep(tmp_path):
    text = GELFAND.replace("256", "64")
    code, out = _run(tmp_path, "sweep", text, extra=["--dims", "2,3"])
    assert code == EXIT_OK
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "N,lambda_star,sup_u_star,classification"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "3"]
    assert all(ln.endswith("regular") for ln in lines[1:])
    code, _ = _run(tmp_path, "sweep", text, extra=["--dims", ""])
    assert code == EXIT_CONFIG


def test_parse_dims():
    assert parse_dims("2..5") == [2, 3, 4, 5]
    assert parse_dims("2, 4,9") == [2, 4, 9]
    assert parse_dims("") == []


def test_energy(tmp_path):
    text = GELFAND + "advection.a = r^2/4\nseed = 7\n"
    code, out = _run(tmp_path, "energy", text)
    assert code == EXIT_OK
    data = json.loads((out / "energy.json").read_text())
    assert data["ordered"] is True and data["difference"] > 0
    assert data["stationarity"] < 1e-4
    assert data["u0_second"] > data["u0_minimal"]
