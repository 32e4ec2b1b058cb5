import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fracpc.cli import main
from fracpc.model import SolverConfig, make_grid
from fracpc.problems import builtin
from fracpc.schemes import solve


def _read_csv(path):
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    return lines[0].split(","), np.array([[float(v) for v in row.split(",")] for row in lines[1:]])


def test_solve_table_one_cell(tmp_path):
    out = tmp_path / "exp.csv"
    code = main(["solve", "--problem", "exp-linear", "--scheme", "ppc", "--kind", "classical", "--dt", "0.0625", "--t-end", "1", "--out", str(out)])
    assert code == 0
    header, data = _read_csv(out)
    assert header == ["t", "y1"]
    assert data.shape == (17, 2)
    assert abs(data[-1, 1] - 16.97264024) <= 3 * 4.7391e-3


def test_solve_csv_round_trips_bit_for_bit(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["solve", "--problem", "power-rhs", "--alpha", "0.56", "--dt", "1/100", "--t-end", "3", "--out", str(out)]) == 0
    _, data = _read_csv(out)
    p = builtin("power-rhs")
    ref = solve(p.make_ivp(alpha=0.56), SolverConfig(), make_grid("1/100", 3))
    assert np.array_equal(data[:, 0], ref.t)
    assert np.array_equal(data[:, 1], ref.states[:, 0])
    # 17 significant digits, trailing zeros dropped
    for line in out.read_text().splitlines()[1:]:
        for field in line.split(","):
            assert field == format(float(field), ".17g")


def test_solve_to_stdout(capsys):
    assert main(["solve", "--dt", "0.25", "--t-end", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,y1" and len(lines) == 6


def test_non_divisible_span_is_a_usage_error(capsys):
    assert main(["solve", "--dt", "0.3", "--t-end", "1"]) == 2
    assert "span not an integer multiple of dt" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--problem", "nope", "--dt", "0.1"],
        ["solve", "--kind", "caputo", "--alpha", "1.5", "--dt", "0.1"],
        ["solve", "--kind", "classical", "--alpha", "0.5", "--dt", "0.1"],
        ["solve", "--kind", "caputo", "--scheme", "ab2", "--dt", "0.1"],
        ["solve", "--problem", "exp-linear", "--beta", "0.3", "--dt", "0.1"],
        ["solve", "--t-end", "1"],
        ["solve", "--dt", "0.1", "--sweeps", "0"],
        ["solve", "--dt", "0.1", "--emit-plot-script"],
        ["bench"],
        ["bench", "--table", "7"],
        ["gm", "--param", "mu=-1", "--dt", "0.5", "--t-end", "1"],
        ["gm", "--param", "zeta=1"],
        ["gm", "--kind", "cf"],
    ],
)
def test_validation_errors_exit_two(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 2


def test_divergence_exit_three_with_partial_csv(tmp_path, capsys):
    out = tmp_path / "blow.csv"
    code = main(["solve", "--problem", "exp-linear", "--kind", "classical", "--dt", "0.1", "--t-end", "20", "--out", str(out)])
    assert code == 3
    err = capsys.readouterr().err
    assert "diverged_at=" in err
    step = int(err.split("diverged_at=")[1].split()[0])
    _, data = _read_csv(out)
    assert len(data) == step


def test_io_errors_exit_four(tmp_path):
    assert main(["solve", "--dt", "0.25", "--t-end", "1", "--out", str(tmp_path)]) == 4
    assert main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 4


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nproblem = power-rhs\ndt = 1/4\nt-end = 3\nalpha = 0.5\nbeta = 0.5\n")
    out = tmp_path / "a.csv"
    assert main(["solve", "--config", str(cfg), "--dt", "0.5", "--out", str(out), "--report", str(tmp_path / "r.json")]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    m = report["manifest"]
    assert (m["problem"], m["dt"], m["t_end"], m["alpha"], m["params"]) == ("power-rhs", "0.5", "3", 0.5, {"beta": 0.5})
    _, data = _read_csv(out)
    assert len(data) == 7


def test_bad_config_lines(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dt 0.1\n")
    assert main(["solve", "--config", str(cfg)]) == 2
    cfg.write_text("table = 3\n")
    assert main(["solve", "--config", str(cfg), "--dt", "0.1"]) == 2


def test_plot_script_emitted_next_to_csv(tmp_path):
    out = tmp_path / "gm.csv"
    assert main(["solve", "--problem", "gierer-meinhardt", "--dt", "0.1", "--t-end", "2", "--out", str(out), "--emit-plot-script"]) == 0
    script = (tmp_path / "gm.gp").read_text()
    assert "'gm.csv' using 1:2" in script and "using 1:3" in script


def test_gm_report_and_phase_csv(tmp_path):
    out = tmp_path / "traj.csv"
    rep = tmp_path / "report.json"
    argv = ["gm", "--alpha", "0.95", "--dt", "0.05", "--t-end", "5", "--out", str(out), "--report", str(rep), "--emit-plot-script"]
    assert main(argv) == 0
    report = json.loads(rep.read_text())
    for key in ("params", "equilibrium", "trace", "determinant", "discriminant", "eigenvalues", "threshold_lhs", "threshold_rhs", "verdict", "branch", "manifest"):
        assert key in report
    assert report["verdict"] == "unstable"
    assert report["threshold_rhs"] == pytest.approx(162.4476, abs=5e-5)
    assert report["eigenvalues"][0].keys() == {"re", "im"}
    assert report["manifest"]["params"] == report["params"]
    header, phase = _read_csv(tmp_path / "traj_phase.csv")
    assert header == ["a", "h"]
    _, traj = _read_csv(out)
    assert np.array_equal(phase, traj[:, 1:])
    assert (tmp_path / "traj_phase.gp").exists()


def test_gm_parameter_override(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["gm", "--param", "mu=5", "--dt", "0.5", "--t-end", "1", "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["params"]["mu"] == 5.0
    assert report["equilibrium"][0] == pytest.approx((1 + 3 * 2) / 5)


def test_gm_manifest_rerun_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["gm", "--alpha", "0.85", "--dt", "0.1", "--t-end", "10", "--out", str(tmp_path / f"{name}.csv"), "--report", str(tmp_path / f"{name}.json")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ja, jb = (json.loads((tmp_path / f"{n}.json").read_text()) for n in "ab")
    ja.pop("manifest"), jb.pop("manifest")
    assert ja == jb


def test_bench_output_independent_of_thread_count(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("FRACPC_THREADS", threads)
        path = tmp_path / f"t4_{threads}.csv"
        assert main(["bench", "--table", "4", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert lines[0] == "method,alpha,dt,max_abs_error,paper_value,ratio"
    assert len(lines) == 13


def test_module_entry_point():
    env = {**os.environ, "PYTHONPATH": os.pathsep.join(sys.path)}
    proc = subprocess.run([sys.executable, "-m", "fracpc", "--help"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert "solve" in proc.stdout and "bench" in proc.stdout and "gm" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "fracpc", "solve", "--scheme", "rk4"], capture_output=True, text=True, env=env)
    assert proc.returncode == 2
