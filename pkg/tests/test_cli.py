import json

import pytest

from nonlocal_lsc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_eval_constant(capsys):
    code, rep = run(capsys, "eval", "--f", "1", "--grid", "64", "--u", "0")
    assert code == 0 and rep["result"]["value"] == 1.0
    assert set(rep) == {"command", "inputs_digest", "seed", "result", "exit_code",
                        "version", "wall_time_s"}


def test_check_sep_convex_exit_codes(capsys):
    assert run(capsys, "check", "sep-convex", "--f", "(w1-z1)^2", "--budget", "200")[0] == 0
    code, rep = run(capsys, "check", "sep-convex", "--f=-w1^2", "--budget", "200")
    assert code == 2 and rep["result"]["status"] == "refuted"


def test_witness_checkerboard(capsys):
    code, rep = run(capsys, "witness", "checkerboard", "--delta", "0.001", "--E", "unit-square",
                    "--resolution", "1024")
    assert code == 0 and rep["result"]["fraction"] >= 0.2


def test_repro_example4(capsys, tmp_path):
    code, rep = run(capsys, "repro", "example-4-nonlsc", "--out", str(tmp_path))
    assert code == 2
    assert rep["result"]["reproduced"]
    assert abs(rep["result"]["margin"] - 1.0) <= 2e-2
    assert (tmp_path / "report.json").exists()
    assert any(p.suffix == ".csv" for p in tmp_path.iterdir())
    assert any(p.suffix == ".svg" for p in tmp_path.iterdir())


@pytest.mark.parametrize("repro_id", ["example-3-divergent", "checkerboard-quarter",
                                      "separable-decomposition"])
def test_repro_reproduces(capsys, repro_id):
    code, rep = run(capsys, "repro", repro_id)
    assert code == 0 and rep["result"]["reproduced"]


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["check", "sep-convex", "--budget", "x"])
    assert info.value.code == 64


def test_tool_error_exit_one(capsys):
    code = main(["eval", "--f", "(w1 +", "--u", "0"])
    assert code == 1
    assert "offset 4" in capsys.readouterr().err


def test_decompose_nonconvex_exit_two(capsys):
    code, _ = run(capsys, "decompose", "--f=-w1^2 - z1^2", "--grid", "8",
                  "--w-range=-1,1,9")
    assert code == 2


def test_output_deterministic(capsys):
    argv = ["check", "phi-convex", "--f", "builtin:example-n2-vector", "--psi-count", "2",
            "--triples", "5"]
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b


def test_minimize_artifacts(capsys, tmp_path):
    code, rep = run(capsys, "minimize", "--f", "(w1-1)^2 + (z1-1)^2", "--grid", "16",
                    "--u0", "0", "--out", str(tmp_path))
    assert code == 0 and rep["result"]["converged"]
    names = {p.name for p in tmp_path.iterdir()}
    assert {"report.json", "trace.csv", "trace.svg", "u_star.csv"} <= names
