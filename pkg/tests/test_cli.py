import csv
import io
import json
import subprocess
import sys

import pytest

from rbfhfd.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_derive_line(capsys):
    code, out, _ = _run(capsys, "derive", "--formula", "d1-6", "--order", "4")
    assert code == 0
    lines = out.splitlines()
    assert "h*alpha[-2] = -1/36 - 1/9 t - 10/63 t^2 - 8/189 t^3" in lines
    assert "beta[-1] = -1/3 - 1/3 t + 1/42 t^2 + 17/126 t^3" in lines


def test_derive_second_derivative_prefix(capsys):
    code, out, _ = _run(capsys, "derive", "--formula", "lap-4", "--order", "2")
    assert code == 0
    assert "h^2*alpha[0,0] = -5 - 19/24 t" in out.splitlines()


def test_derive_json(capsys):
    code, out, _ = _run(capsys, "derive", "--formula", "d2-4", "--order", "3", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["alpha"]["0"] == ["-12/5", "-84/125", "3021/3125"]


def test_derive_env_trunc(capsys, monkeypatch):
    monkeypatch.setenv("RBFHFD_TRUNC", "3")
    code, out, _ = _run(capsys, "derive", "--formula", "d1-4", "--format", "json")
    assert code == 0 and json.loads(out)["trunc_len"] == 3


def test_flat_check(capsys):
    code, out, _ = _run(capsys, "flat-check")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 11 and all(s.startswith("PASS") for s in lines)


def test_optimal_eps(capsys):
    code, out, _ = _run(capsys, "optimal-eps", "--formula", "d1-6", "--testfn", "u1", "--x0", "0.4")
    assert code == 0
    assert float(out) == pytest.approx(0.4004391108, abs=1e-6)


def test_optimal_eps_json(capsys):
    code, out, _ = _run(capsys, "optimal-eps", "--formula", "lap-4", "--testfn", "u5",
                        "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["mechanism"] == "derivative-minimum"


def test_weights(capsys):
    code, out, _ = _run(capsys, "weights", "--formula", "d1-4", "--eps", "1", "--h", "0.1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:3] == ["formula", "kernel", "eps"]
    assert len(rows) == 1 + 3 + 2


@pytest.mark.parametrize("argv", [
    ["derive", "--formula", "d3-4"],
    ["lte", "--formula", "d1-6", "--testfn", "u3", "--eps", "1", "--h", "0.1"],
    ["lte", "--formula", "lap-4", "--testfn", "u1", "--eps", "1", "--h", "0.1"],
    ["nonsense"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, _ = _run(capsys, *argv)
    assert code == 2


def test_numeric_failure_exit_1(capsys):
    # every derivative of u9 that enters the LTE vanishes at the origin
    code, _, err = _run(capsys, "optimal-eps", "--formula", "lap-4", "--testfn", "u9",
                        "--x0", "0", "--y0", "0")
    assert code == 1 and err.startswith("error:")


def test_sweep_round_trip(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, _, _ = _run(capsys, "sweep", "--formula", "d1-6", "--testfn", "u1", "--eps-start",
                      "0.1", "--eps-stop", "1", "--eps-count", "4", "--h", "0.1", "0.05",
                      "-o", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["formula", "kernel", "testfn", "x0", "y0", "eps", "h", "abs_tau0"]
    assert len(rows) == 9
    for r in rows[1:]:
        v = float(r[7])
        assert format(v, ".17g") == r[7]


def test_converge_and_compare(capsys):
    code, out, _ = _run(capsys, "converge", "--formula", "d1-6", "--testfn", "u2")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][-1] == "observed_order"
    assert abs(float(rows[-1][-1]) - 6) < 0.3
    code, out, _ = _run(capsys, "compare", "--formula", "d1-6", "--testfn", "u1",
                        "--eps-start", "0.2", "--eps-stop", "0.6", "--eps-count", "3")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][-3:] == ["abs_tau0_ga", "abs_tau0_mq", "abs_tau0_fd"]
    assert len(rows) == 4


def test_lte(capsys):
    code, out, _ = _run(capsys, "lte", "--formula", "lap-6", "--testfn", "u9", "--eps", "0.5",
                        "--h", "0.05")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[1][:3] == ["lap-6", "ga", "u9"]


def test_deterministic(capsys):
    argv = ["sweep", "--formula", "lap-4", "--testfn", "u4", "--eps-count", "5", "--h", "0.05",
            "--kernel", "mq"]
    _, a, _ = _run(capsys, *argv)
    _, b, _ = _run(capsys, *argv)
    assert a == b and a


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "rbfhfd.cli", "flat-check"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.count("PASS") == 11
