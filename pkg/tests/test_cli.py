import json

import pytest

from isoblock.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out), err


def test_lorenz_degree(capsys):
    code, rep, err = call(capsys, "degree", "--catalog", "lorenz", "--param", "r=24", "--region", "ball:0,0,0:60")
    assert code == 0 and rep["degree"] == -1 and rep["method"] == "kronecker"
    assert abs(rep["raw"] + 1) < 0.05
    assert len(rep["zeros"]) == 3
    assert rep["tool-version"] and rep["config"]["tolerances"]["newton_tol"] == 1e-10
    assert "degree -1" in err


def test_verify_tangency(capsys):
    code, rep, _ = call(capsys, "verify", "tangency", "--field", "x,-y", "--region", "box:-1,-1:1,1")
    assert code == 0 and rep["verdict"] == "pass" and rep["lhs"] == rep["rhs"] == 4


def test_degenerate_zero_exit_code(capsys):
    code, rep, err = call(capsys, "degree", "--field", "x^2,y", "--region", "ball:0,0:1", "--method", "zeros")
    assert code == 2 and rep["error_type"] == "DegenerateZeroError"
    assert "degenerate" in err


@pytest.mark.parametrize("argv", [
    ["degree", "--field", "x,q", "--region", "ball:0,0:1"],
    ["degree", "--field", "x,y", "--region", "ball:0,0,0:1"],
    ["degree", "--field", "x,y", "--catalog", "saddle2", "--region", "ball:0,0:1"],
    ["degree", "--catalog", "saddle2", "--region", "disk:0,0:1"],
    ["degree", "--catalog", "lorenz", "--param", "r24", "--region", "ball:0,0,0:60"],
    ["verify", "nosuch", "--catalog", "saddle2", "--region", "ball:0,0:1"],
    ["index", "--catalog", "saddle2", "--point", "0,0"],
])
def test_input_errors_exit_3(capsys, argv):
    code, rep, _ = call(capsys, *argv)
    assert code == 3 and rep["verdict"] == "input-error"


def test_failed_verification_exit_1(capsys):
    code, rep, _ = call(capsys, "verify", "eq1", "--catalog", "saddle2", "--region", "box:-1,-1:1,1",
                        "--chiK", "1", "--chiS", "1")
    assert code == 1 and rep["verdict"] == "fail"


def test_inconclusive_is_not_failure(capsys):
    code, rep, _ = call(capsys, "verify", "connection", "--catalog", "limit_cycle", "--region", "ball:0,0:1.5",
                        "--chiA", "0", "--chiR", "1", "--chiS", "0", "--chiK", "1")
    assert code == 0 and rep["verdict"] == "inconclusive" and rep["extra"]["chi_C"] == 0


def test_lorenz_connection(capsys):
    code, rep, _ = call(capsys, "verify", "connection", "--catalog", "lorenz", "--region", "ball:0,0,0:60",
                        "--chiA", "2", "--chiR", "-1", "--chiS", "0", "--chiK", "1")
    assert code == 0 and rep["verdict"] == "connection exists" and rep["extra"]["chi_C"] == 0


def test_index_and_classify(capsys, tmp_path):
    code, rep, _ = call(capsys, "index", "--field", "x^2-y^2, 2*x*y", "--point", "0,0", "--radius", "1")
    assert code == 0 and rep["index"] == 2
    dump = tmp_path / "b.csv"
    code, rep, _ = call(capsys, "classify", "--catalog", "saddle2", "--region", "box:-1,-1:1,1",
                        "--dump", str(dump))
    assert code == 0 and rep["boundary"]["tangency_count"] == 4
    assert rep["euler"]["chi_N"] == 1 and rep["euler"]["chi_L"] == 2
    lines = dump.read_text().splitlines()
    assert lines[0] == "x1,x2,label,alignment" and len(lines) == 65


def test_config_file_and_out(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"catalog": "saddle2", "region": "ball:0,0:1", "loop_samples": 128}))
    out = tmp_path / "report.json"
    code = run(["degree", "--config", str(cfg), "--out", str(out)])
    capsys.readouterr()
    rep = json.loads(out.read_text())
    assert code == 0 and rep["degree"] == -1
    assert rep["config"]["tolerances"]["loop_samples"] == 128
    cfg.write_text(json.dumps({"catalog": "saddle2", "bogus": 1}))
    assert run(["degree", "--config", str(cfg)]) == 3


def test_reports_are_deterministic(capsys):
    argv = ["verify", "antipodal", "--catalog", "lorenz", "--region", "ball:0,0,0:60", "--chiK", "1", "--chiS", "0",
            "--seed", "3"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    a.pop("timing"), b.pop("timing")
    assert a == b and a["verdict"] == "pass"


def test_catalog_listing(capsys):
    code, rep, _ = call(capsys, "catalog")
    assert code == 0 and {r["name"] for r in rep["catalog"]} >= {"lorenz", "saddle2", "attractor(n)"}


def test_quick_suite(capsys):
    code, rep, _ = call(capsys, "suite", "--quick")
    assert code == 0
    assert set(rep["counts"]) <= {"pass", "connection exists", "inconclusive"}
    assert rep["counts"]["pass"] >= 25
