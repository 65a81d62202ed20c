import json

import pytest

from dividend2d import NonConvergenceError
from dividend2d.cli import main


def run(capsys, argv):
    rc = main(argv)
    return rc, capsys.readouterr().out


def test_value_barrier(capsys):
    rc, out = run(capsys, ["value-barrier", "--u1", "1", "--u2", "2", "--a", "0.1", "--b", "14"])
    assert rc == 0
    assert out.startswith("V1 = 37.94089598 [series")


def test_value_barrier_corner_is_zero(capsys):
    rc, out = run(capsys, ["value-barrier", "--u1", "0", "--u2", "14", "--a", "0.1", "--b", "14"])
    assert rc == 0
    v = float(out.split()[2])
    assert abs(v) < 1e-6


def test_value_impulse_both_methods(capsys):
    rc, out = run(capsys, ["value-impulse", "--u1", "3", "--u2", "2", "--cost", "0.5"])
    assert rc == 0
    assert "[closed-form-high]" in out and "p = " in out and "A = " in out
    rc, out = run(capsys, ["value-impulse", "--u1", "1", "--u2", "2", "--cost", "0.5"])
    assert rc == 0
    assert "[quadrature-low]" in out
    assert "claim average runs over (0, u1]" in out  # integration-limit note


def test_simulate_repeatable(capsys):
    argv = ["simulate", "barrier", "--paths", "1000", "--seed", "7",
            "--u1", "1", "--u2", "2", "--a", "0.1", "--b", "14"]
    rc1, out1 = run(capsys, argv)
    rc2, out2 = run(capsys, argv)
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert "se=" in out1 and "[mc" in out1


def test_simulate_missing_flags(capsys):
    rc, out = run(capsys, ["simulate", "barrier", "--paths", "10", "--seed", "1",
                           "--u1", "1", "--u2", "2"])
    assert rc == 2
    assert "--a/--b" in out


def test_simulate_trace(tmp_path, capsys):
    trace = tmp_path / "path.csv"
    rc, _ = run(capsys, ["simulate", "barrier", "--paths", "10", "--seed", "3",
                         "--u1", "1", "--u2", "2", "--a", "0.1", "--b", "14",
                         "--trace", str(trace)])
    assert rc == 0
    lines = trace.read_text().strip().splitlines()
    assert lines[0] == "t,y1,y2,event"
    assert lines[1].endswith("start")


def test_table_csv(tmp_path, capsys):
    out_file = tmp_path / "t1.csv"
    rc, out = run(capsys, ["table", "1", "--out", str(out_file)])
    assert rc == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines[0] == "a,b,u1,u2,v1,reference,diff"
    assert len(lines) == 25
    assert "max|diff|" in out


def test_optimize_csv(capsys):
    rc, out = run(capsys, ["optimize", "--u1", "1", "--u2", "2",
                           "--a-grid", "0.1,0.2", "--b-grid", "14,15"])
    assert rc == 0
    assert out.splitlines()[0] == "a,b,u1,u2,v1,terms,tail"
    assert "argmax a=0.1 b=14.0" in out


def test_validate_passes(capsys):
    rc, out = run(capsys, ["validate"])
    assert rc == 0
    assert "all checks passed" in out


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"c1": 4.0, "c2": 3.0, "lambda": 1.0, "alpha": 2.0, "q": 0.2}))
    rc, out_cfg = run(capsys, ["value-barrier", "--u1", "1", "--u2", "2", "--a", "0.1",
                               "--b", "14", "--config", str(cfg)])
    assert rc == 0
    rc, out_override = run(capsys, ["value-barrier", "--u1", "1", "--u2", "2", "--a", "0.1",
                                    "--b", "14", "--config", str(cfg), "--q", "0.1"])
    assert rc == 0
    assert out_cfg != out_override
    assert out_override.startswith("V1 = 37.94089598")


def test_bad_input_exit_code(capsys):
    rc, out = run(capsys, ["value-barrier", "--u1", "1", "--u2", "2", "--a", "0.1",
                           "--b", "14", "--c2", "9"])
    assert rc == 2
    assert "c1 > c2" in out


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"c1": 4.0, "mu": 1.0}))
    rc, out = run(capsys, ["table", "1", "--config", str(cfg)])
    assert rc == 2
    assert "unknown config keys" in out


def test_nonconvergence_exit_code(capsys, monkeypatch):
    import dividend2d.cli as cli

    def boom(args):
        raise NonConvergenceError("synthetic")

    monkeypatch.setattr(cli, "cmd_table", boom)
    rc, out = run(capsys, ["table", "1"])
    assert rc == 3
    assert "numerical error" in out
