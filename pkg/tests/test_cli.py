import json
import subprocess
import sys
from pathlib import Path

import pytest

from asmcmc import cli, verify
from asmcmc.report import BoundReport

CONFIG = """
[target]
name = gaussian
dim = 1

[adapt]
alpha_star = 0.234
n_steps = 3000

[output]
dir = {out}
prefix = t
thin = 7

[run]
seed = 99
replicas = {replicas}
functionals = x1_sq, x1_pos
"""


def write_config(tmp_path, out, replicas=2, extra=""):
    path = tmp_path / f"cfg_{out.name}.ini"
    path.write_text(CONFIG.format(out=out, replicas=replicas) + extra)
    return path


def read_outputs(out: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_run_writes_trace_and_summary(tmp_path):
    out = tmp_path / "a"
    assert cli.main(["run", str(write_config(tmp_path, out))]) == 0
    files = read_outputs(out)
    assert set(files) == {"t_r0.csv", "t_r0.summary.json", "t_r1.csv", "t_r1.summary.json"}
    lines = files["t_r0.csv"].decode().splitlines()
    assert lines[0] == "n,x1,s,theta,alpha,accepted,eta"
    # records n = 2..3001, kept when (n - 1) is a multiple of thin
    assert len(lines) - 1 == len(range(7, 3001, 7))
    assert lines[1].startswith("8,")
    summary = json.loads(files["t_r0.summary.json"])
    assert summary["n_steps"] == 3000 and summary["replica"] == 0
    assert set(summary["ergodic_averages"]) == {"x1_sq", "x1_pos"}


def test_run_is_byte_identical_across_repeats_and_jobs(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli.main(["run", str(write_config(tmp_path, a, 3))]) == 0
    assert cli.main(["run", str(write_config(tmp_path, b, 3))]) == 0
    assert cli.main(["run", str(write_config(tmp_path, c, 3)), "--jobs", "2"]) == 0
    assert read_outputs(a) == read_outputs(b) == read_outputs(c)


def test_adding_replicas_keeps_existing_ones(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["run", str(write_config(tmp_path, a, 1))])
    cli.main(["run", str(write_config(tmp_path, b, 3))])
    assert read_outputs(a)["t_r0.csv"] == read_outputs(b)["t_r0.csv"]


def test_seed_override_changes_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["run", str(write_config(tmp_path, a, 1))])
    cli.main(["run", str(write_config(tmp_path, b, 1)), "--seed", "100"])
    assert read_outputs(a)["t_r0.csv"] != read_outputs(b)["t_r0.csv"]


def test_jobs_env_default(monkeypatch):
    monkeypatch.setenv("ASMCMC_JOBS", "3")
    assert cli._jobs(None) == 3
    monkeypatch.setenv("ASMCMC_JOBS", "junk")
    assert cli._jobs(None) == 1


def test_usage_and_io_errors(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.ini")]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[target]\nname = gaussian\n[adapt]\ngamma = 2\n")
    assert cli.main(["run", str(bad)]) == 2
    assert "line 4: [adapt] gamma" in capsys.readouterr().err
    assert cli.main(["verify", "nonsense"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["run", str(write_config(tmp_path, blocker / "sub"))]) == 2


def test_verify_single_check_writes_jsonl(tmp_path, capsys):
    report = tmp_path / "r.jsonl"
    assert cli.main(["verify", "proposition:symmetry", "--report", str(report)]) == 0
    rows = [json.loads(line) for line in report.read_text().splitlines()]
    assert rows and all(r["name"] == "symmetry" and r["pass"] for r in rows)
    assert {"name", "params", "quantity", "grid", "values", "threshold", "fitted",
            "pass"} <= set(rows[0])
    assert "PASS symmetry" in capsys.readouterr().err


def test_verify_names_failing_check(monkeypatch, capsys):
    def failing(ctx):
        return [BoundReport("always_fails", "x", passed=False)]

    monkeypatch.setitem(verify.CHECKS, "always_fails", (("fast",), failing))
    assert cli.main(["verify", "proposition:always_fails"]) == 1
    assert "failed checks: always_fails" in capsys.readouterr().err


def test_verify_skips_quadrature_above_two_dims(tmp_path, capsys):
    cfg = tmp_path / "d3.ini"
    cfg.write_text("[target]\nname = uniform_ball\ndim = 3\n")
    assert cli.main(["verify", "proposition:coherence", "--config", str(cfg)]) == 0
    out = capsys.readouterr()
    row = json.loads(out.out.splitlines()[0])
    assert row["gated"] is False and "skipped" in row["notes"][0]


def test_sweep_runs_cells_and_reports_failures(tmp_path):
    out = tmp_path / "sw"
    cfg = write_config(tmp_path, out, 1, "\n[sweep]\nalpha_star = 0.1, 0.3\ngamma = 0.6, 0.9\n")
    assert cli.main(["sweep", str(cfg)]) == 0
    rows = (out / "t_sweep.csv").read_text().splitlines()
    assert rows[0].startswith("cell,adapt.alpha_star,adapt.gamma,replica,status")
    assert len(rows) == 5 and all(",ok," in r for r in rows[1:])
    bad = write_config(tmp_path, tmp_path / "sw2", 1, "\n[sweep]\ntarget.dim = 1, 0\n")
    assert cli.main(["sweep", str(bad)]) == 1


def test_empty_sweep_is_a_noop(tmp_path, capsys):
    out = tmp_path / "none"
    assert cli.main(["sweep", str(write_config(tmp_path, out, 1))]) == 0
    assert "empty" in capsys.readouterr().out
    assert not out.exists()


def test_module_entry_point(tmp_path):
    out = tmp_path / "m"
    res = subprocess.run([sys.executable, "-m", "asmcmc.cli", "run",
                          str(write_config(tmp_path, out, 1))], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "replica 0" in res.stdout
