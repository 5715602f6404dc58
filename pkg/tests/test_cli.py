import json
import math

import numpy as np
import pytest

from besov_path_lab import SampledPath, read_csv, write_csv
from besov_path_lab.cli import main


@pytest.fixture
def ramp_csv(tmp_path):
    path = tmp_path / "ramp.csv"
    write_csv(SampledPath.from_function(lambda t: t, 12), path)
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_constant(tmp_path, capsys):
    path = tmp_path / "c.csv"
    write_csv(SampledPath.constant(2.0, 6), path)
    code, out, _ = run(capsys, "norm", str(path), "--young", "power:3", "--json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0]["value"] == pytest.approx(2.0, rel=1e-12)
    assert rows[0]["seminorm"] == 0.0


def test_norm_ramp_matches_closed_form(ramp_csv, capsys):
    code, out, _ = run(capsys, "norm", str(ramp_csv), "--norms", "dyadic,holder,gagliardo", "--json")
    assert code == 0
    rows = {r["norm"]: r for r in json.loads(out)["rows"]}
    assert rows["dyadic"]["value"] == pytest.approx(3**-0.5 + 0.5, rel=1e-6)
    assert rows["holder(0.5)"]["value"] == pytest.approx(1.0, rel=1e-12)


def test_norm_table_output(ramp_csv, capsys):
    code, out, _ = run(capsys, "norm", str(ramp_csv), "--young", "phi2", "--norms", "dyadic,exhaustive,full")
    assert code == 0
    assert "level profile (fast)" in out and "level profile (exhaustive)" in out and "grid-sup" in out


def test_norm_reports_missing_column(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,y\n0,1\n1,2\n")
    code, _, err = run(capsys, "norm", str(bad))
    assert code == 2
    assert "missing column 'x0'" in err


def test_norm_unknown_kind(ramp_csv, capsys):
    assert run(capsys, "norm", str(ramp_csv), "--norms", "sobolev")[0] == 2


def test_simulate_is_byte_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--J", "6", "--seed", "42", "d=3", "m=3", "integrand=diag:1", "eigen=heat"]
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    for name in ("W.csv", "M.csv", "u.csv", "v.csv", "bundle.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["resolved_config"]["seed"] == 42
    assert manifest["argv"][:2] == ["bpl", "simulate"]
    sidecar = json.loads((a / "bundle.json").read_text())
    assert sidecar["eigenvalues"][0] == pytest.approx(math.pi**2)


def test_simulate_zero_eigenvalues_u_equals_M(tmp_path, capsys):
    run(capsys, "simulate", "--J", "7", "--out", str(tmp_path), "eigen=zero")
    u, M = read_csv(tmp_path / "u.csv"), read_csv(tmp_path / "M.csv")
    np.testing.assert_allclose(u.values, M.values, atol=1e-13)


def test_simulate_zero_integrand(tmp_path, capsys):
    run(capsys, "simulate", "--J", "5", "--out", str(tmp_path), "integrand=zero", "eigen=scalar:3")
    for name in ("M", "u", "v"):
        assert np.all(read_csv(tmp_path / f"{name}.csv").values == 0)


def test_simulate_then_norm_round_trip(tmp_path, capsys):
    from besov_path_lab import BesovParams, ExpPower, RngSpec, dyadic_besov_norm, sample_brownian

    run(capsys, "simulate", "--J", "9", "--seed", "5", "--out", str(tmp_path))
    code, out, _ = run(capsys, "norm", str(tmp_path / "W.csv"), "--young", "phi2", "--norms", "dyadic", "--json")
    W = sample_brownian(9, 1, RngSpec(5, 0))
    direct = dyadic_besov_norm(W, BesovParams(0.5, math.inf, ExpPower(2)))[0]
    assert json.loads(out)["rows"][0]["value"] == pytest.approx(direct, rel=1e-12)


def test_simulate_replicas_and_env_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BPL_OUT_DIR", str(tmp_path))
    assert run(capsys, "simulate", "--J", "4", "--replicas", "3", "--stream", "10")[0] == 0
    made = sorted(p.name for p in (tmp_path / "simulate").iterdir())
    assert "W_10.csv" in made and "W_12.csv" in made and "manifest.json" in made


def test_verify_axiom_gauss(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "axiom_gauss", "--out", str(tmp_path))
    assert code == 0
    assert out.startswith("[PASS] axiom_gauss")
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] and report["invocation"][:3] == ["bpl", "verify", "axiom_gauss"]
    assert (tmp_path / "manifest.json").exists()
    code, out, _ = run(capsys, "report", str(tmp_path / "report.json"))
    assert code == 0 and "[PASS]" in out


def test_verify_flag_form_and_config_file(tmp_path, capsys):
    cfg = tmp_path / "r.cfg"
    cfg.write_text("J = 5\nd = 2\nm = 2\n")
    code, _, _ = run(capsys, "verify", "--experiment", "representation", "--config", str(cfg), "--replicas", "100",
                     "--out", str(tmp_path / "o"))
    assert code == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["config"]["J"] == 5


def test_verify_smoke_mode(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "representation", "--replicas", "10", "--out", str(tmp_path),
                       "tol.defect=1e-300", "J=4", "d=2", "m=2")
    assert code == 0
    assert "warning" in out
    assert json.loads((tmp_path / "report.json").read_text())["smoke"] is True


def test_verify_failure_exit_code(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "representation", "--replicas", "100", "--out", str(tmp_path),
                     "tol.defect=1e-300", "J=4", "d=2", "m=2")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["verify", "nope"],
    ["verify"],
    ["verify", "axiom_gauss", "colour=red"],
    ["verify", "moment_growth", "tol.banana=1"],
    ["report", "does-not-exist.json"],
    ["simulate", "integrand=wobble"],
])
def test_usage_errors_exit_2(tmp_path, capsys, argv):
    if argv[0] != "report":
        argv = argv + ["--out", str(tmp_path)]
    assert run(capsys, *argv)[0] == 2
