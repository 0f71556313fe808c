import csv
import json
import math

import pytest

from orlicz_lab.cli import EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_OK, EXIT_VIOLATION, main


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def half_csv(tmp_path):
    p = tmp_path / "half.csv"
    p.write_text("point_id,value,mass\n0,1,0.5\n1,0,0.5\n")
    return p


def test_norm_constant_luxemburg(capsys, tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("point_id,value,mass\n7,2.5,1\n")
    code, out, _ = run(capsys, "norm", "luxemburg", str(p), "--psi", "power:2")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(2.5, rel=1e-11)


def test_norm_lorentz_two_atom(capsys, half_csv):
    code, out, _ = run(capsys, "norm", "lorentz", str(half_csv), "--p", "2", "--q", "2")
    d = json.loads(out)
    assert code == 0 and d["value"] == pytest.approx(math.sqrt(0.5), rel=1e-11)
    assert d["method"] == "step_quadrature"
    assert out.strip().startswith('{"value": 0.707106781187')


def test_norm_other_kinds(capsys, half_csv):
    assert json.loads(run(capsys, "norm", "lp", str(half_csv), "--p", "1")[1])["value"] == 0.5
    code, out, _ = run(capsys, "norm", "orlicz", str(half_csv), "--psi", "power:2")
    assert json.loads(out)["value"] == pytest.approx(math.sqrt(2), rel=1e-11)
    code, out, _ = run(capsys, "norm", "lorentz", str(half_csv), "--p", "2", "--q", "inf")
    assert json.loads(out)["value"] == pytest.approx(math.sqrt(0.5), rel=1e-11)


def test_norm_bad_inputs_exit_4(capsys, tmp_path, half_csv):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run(capsys, "norm", "lp", str(empty), "--p", "2")[0] == EXIT_CONFIG
    bad = tmp_path / "bad.csv"
    bad.write_text("point_id,value,mass\n0,1,0.5\n1,oops,0.5\n")
    code, _, err = run(capsys, "norm", "lp", str(bad), "--p", "2")
    assert code == EXIT_CONFIG and "line 3" in err
    assert run(capsys, "norm", "lp", str(tmp_path / "missing.csv"), "--p", "2")[0] == EXIT_CONFIG
    assert run(capsys, "norm", "luxemburg", str(half_csv))[0] == EXIT_CONFIG
    assert run(capsys, "norm", "lp", str(half_csv), "--p", "0.5")[0] == EXIT_CONFIG


def test_verify_khinchin_orlicz(capsys):
    code, out, _ = run(capsys, "verify", "khinchin-orlicz", "--psi", "power:1", "--n", "12",
                       "--random-per-n", "10")
    d = json.loads(out)
    assert code == EXIT_OK and d["passed"]
    assert d["ratio_min"] == pytest.approx(0.70711, abs=5e-3)


def test_verify_exp_moment(capsys):
    code, out, _ = run(capsys, "verify", "exp-moment", "--n", "16", "--random-per-n", "3")
    d = json.loads(out)
    assert code == EXIT_OK and d["ratio_max"] <= 5.436563657


def test_verify_config_errors(capsys):
    assert run(capsys, "verify", "mz-lorentz", "--p", "1", "--q", "2", "--seed", "0")[0] == EXIT_CONFIG
    assert run(capsys, "verify", "mz-orlicz", "--psi", "power:2")[0] == EXIT_CONFIG  # no seed
    assert run(capsys, "verify", "no-such-experiment")[0] == EXIT_CONFIG
    assert run(capsys, "verify", "khinchin-orlicz", "--psi", "power:0.5")[0] == EXIT_CONFIG
    assert run(capsys, "verify", "khinchin-lorentz")[0] == EXIT_CONFIG
    assert run(capsys, "verify", "interpolation", "--tol", "-1")[0] == EXIT_CONFIG


def test_verify_strict_hypothesis_failure(capsys):
    args = ["verify", "khinchin-orlicz", "--psi", "exp_square", "--n", "2", "--random-per-n", "1"]
    assert run(capsys, *args)[0] in (EXIT_OK, EXIT_VIOLATION)
    assert run(capsys, *args, "--strict")[0] == EXIT_HYPOTHESIS


def test_verify_violation_exit_2(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('psi = "power:1.5"\nn = "2,3"\nrandom_per_n = 2\n\n[tolerances]\nband = 1.0001\n')
    code, out, err = run(capsys, "verify", "khinchin-orlicz", "--config", str(cfg))
    assert code == EXIT_VIOLATION and "band" in err
    assert json.loads(out)["passed"] is False


def test_config_file_json_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lorentz": [2, 2], "n": "1,2,3", "random_per_n": 2}))
    code, out, _ = run(capsys, "verify", "khinchin-lorentz", "--config", str(cfg))
    d = json.loads(out)
    assert code == 0 and d["params"]["lorentz"] == [2.0, 2.0]
    code, out, _ = run(capsys, "verify", "khinchin-lorentz", "--config", str(cfg), "--q", "inf")
    assert json.loads(out)["params"]["lorentz"] == [2.0, "inf"]


def test_outputs_written_and_append_safe(capsys, tmp_path):
    base = tmp_path / "out" / "run"
    args = ["verify", "interpolation", "--n", "4", "--random-per-n", "2", "--out", str(base),
            "--format", "both"]
    assert run(capsys, *args)[0] == 0
    first = (tmp_path / "out" / "run.json").read_text()
    assert run(capsys, *args)[0] == 0
    assert (tmp_path / "out" / "run.json").read_text() == first
    with open(tmp_path / "out" / "run.summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and rows[0]["experiment"] == "interpolation"
    with open(tmp_path / "out" / "run.cases.csv") as fh:
        cases = list(csv.DictReader(fh))
    assert len(cases) == json.loads(first)["cases"] and "ratio" in cases[0]
    timing = json.loads((tmp_path / "out" / "run.timing.json").read_text())
    assert timing["runtime_ms"] >= 0


def test_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = run(capsys, "verify", "interpolation", "--n", "2", "--random-per-n", "1",
               "--out", str(blocker / "sub" / "r"))[0]
    assert code == EXIT_CONFIG


def test_mc_cli_deterministic(capsys):
    args = ["verify", "mz-orlicz", "--psi", "power:2", "--family", "uniform", "--n", "2,4",
            "--m", "2000", "--seed", "5", "--seeds", "2"]
    code, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert code == 0 and a == b


def test_young_check(capsys):
    code, out, _ = run(capsys, "young", "check", "--psi", "power:2", "--hypothesis", "delta2")
    d = json.loads(out)
    assert code == 0 and d["satisfied"] and d["worst_ratio_high"] == pytest.approx(4.0)
    code, out, _ = run(capsys, "young", "check", "--psi", "exp_square", "--hypothesis", "square",
                       "--grid-min", "1", "--grid-max", "10", "--strict")
    assert code == EXIT_HYPOTHESIS and not json.loads(out)["satisfied"]
    code, out, _ = run(capsys, "young", "check", "--psi", "piecewise:0,0.5;1,2")
    assert code == 0 and not json.loads(out)["satisfied"]


def test_verify_csv_stdout(capsys):
    code, out, _ = run(capsys, "verify", "rearrangement", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("experiment,config_hash") and len(lines) == 2


def test_version(capsys):
    assert run(capsys, "--version")[0] == 0
