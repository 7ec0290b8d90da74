"""Command line: artifacts, exit codes, replay, and determinism.

Everything runs in-process through quasipot.cli.run so exit codes and
stderr text are asserted directly; the installed entry point itself is
exercised once through the interpreter.
"""

import filecmp
import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from quasipot import FieldSpec, integrate_potential
from quasipot.cli import run

SIN = "sin(2*pi*x)"
TILTED = "sin(2*pi*x)+0.5"
STANDARD = '{"f0": "1", "f1": "-1", "r01": "1", "r10": "1"}'
ASYM = '{"f0": "1", "f1": "-1", "r01": "1 + 0.5*sin(2*pi*x)^2", "r10": "1"}'


def read_rows(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh]
    return header, rows


def test_phi_artifacts(tmp_path):
    out = tmp_path / "run"
    assert run(["phi", "--field", SIN, "--n", "512", "--out", str(out)]) == 0
    assert sorted(os.listdir(out)) == ["manifest.json", "phi.csv",
                                       "trace.json"]
    header, rows = read_rows(out / "phi.csv")
    assert header == ["x", "S", "Phi", "is_flat"]
    assert len(rows) == 513
    # 17 significant digits survive the round trip exactly
    S = integrate_potential(FieldSpec.expression(SIN), 512)
    assert float(rows[37][0]) == 37.0 / 512.0
    assert float(rows[37][1]) == S.s_values[37]
    assert rows[37][3] in ("0", "1")


def test_phi_trace_payload(tmp_path):
    out = tmp_path / "run"
    assert run(["phi", "--field", TILTED, "--n", "4096",
                "--out", str(out)]) == 0
    data = json.loads((out / "trace.json").read_text())
    for key in ("b", "levels", "z", "y", "method", "n", "drift", "flat_level",
                "tau_flat", "under_resolved", "route_gap", "flat_intervals",
                "chain"):
        assert key in data
    assert data["route_gap"] <= 1e-10
    assert data["b"] == pytest.approx(7.0 / 12.0, abs=2.0 / 4096)
    assert data["chain"]["ell"] == 1
    assert data["under_resolved"] is False


def test_nothing_is_written_outside_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(["phi", "--field", SIN, "--n", "512", "--out", "sub"]) == 0
    assert os.listdir(tmp_path) == ["sub"]


def test_parse_error_reports_the_offset(tmp_path, capsys):
    rc = run(["phi", "--field", "sin(", "--out", str(tmp_path / "x")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "error:" in err and "hint:" in err
    assert "offset 4" in err


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert run(["frobnicate"]) == 2


def test_duplicate_sweep_values_are_rejected(tmp_path, capsys):
    rc = run(["density", "--field", SIN, "--eps", "0.3,0.3",
              "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "distinct" in capsys.readouterr().err


def test_density_artifacts_and_replay(tmp_path):
    first = tmp_path / "first"
    again = tmp_path / "again"
    args = ["density", "--field", SIN, "--eps", "0.4,0.3", "--n", "512"]
    assert run(args + ["--out", str(first)]) == 0
    names = sorted(os.listdir(first))
    assert names == ["convergence.csv", "convergence.json", "density_0.3.csv",
                     "density_0.4.csv", "manifest.json"]
    header, rows = read_rows(first / "convergence.csv")
    assert header == ["eps_or_lambda", "sup_gap"]
    gaps = [float(r[1]) for r in rows]
    assert gaps[1] < gaps[0]

    # replaying the manifest reproduces every table byte for byte
    assert run(["pipeline", "--config", str(first / "manifest.json"),
                "--out", str(again)]) == 0
    for name in names:
        if name.endswith(".csv"):
            assert filecmp.cmp(first / name, again / name, shallow=False), name
    a = json.loads((first / "manifest.json").read_text())
    b = json.loads((again / "manifest.json").read_text())
    a["config"].pop("out"), b["config"].pop("out")
    assert a == b


def test_pipeline_refuses_to_nest(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "pipeline", "config": {}}))
    assert run(["pipeline", "--config", str(cfg),
                "--out", str(tmp_path / "x")]) == 2
    assert "refusing to nest" in capsys.readouterr().err


def test_pipeline_rejects_malformed_configs(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "warp"}))
    assert run(["pipeline", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps(["not", "an", "object"]))
    assert run(["pipeline", "--config", str(cfg)]) == 2
    assert run(["pipeline", "--config", str(tmp_path / "missing.json")]) == 2


def test_simulate_artifacts_are_deterministic(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert run(["simulate", "--field", SIN, "--eps", "0.3", "--T", "50",
                    "--ref-n", "512", "--out", str(out)]) == 0
    assert filecmp.cmp(outs[0] / "sim.csv", outs[1] / "sim.csv",
                       shallow=False)
    data = json.loads((outs[0] / "sim.json").read_text())
    assert sorted(data) == ["counts", "meta", "seed", "total_samples",
                            "tv_distance"]
    assert sum(data["counts"]) == data["total_samples"]
    assert data["tv_distance"] <= 0.2


def test_simulate_pdmp_accepts_inline_and_file_specs(tmp_path):
    out = tmp_path / "inline"
    assert run(["simulate-pdmp", "--pdmp", STANDARD, "--T", "50",
                "--ref-n", "512", "--out", str(out)]) == 0
    assert (out / "sim_pdmp.csv").exists()
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(STANDARD)
    out2 = tmp_path / "fromfile"
    assert run(["simulate-pdmp", "--pdmp", "@" + str(spec_path), "--T", "50",
                "--ref-n", "512", "--out", str(out2)]) == 0
    assert filecmp.cmp(out / "sim_pdmp.csv", out2 / "sim_pdmp.csv",
                       shallow=False)


@pytest.mark.parametrize("bad", ["@/no/such/file.json", "{broken",
                                 '{"f0": "1"}'])
def test_bad_process_specs_fail_cleanly(tmp_path, capsys, bad):
    rc = run(["simulate-pdmp", "--pdmp", bad, "--T", "50",
              "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "hint:" in capsys.readouterr().err


def test_pdmp_density_artifacts(tmp_path):
    out = tmp_path / "run"
    assert run(["pdmp-density", "--pdmp", ASYM, "--lam", "20,50",
                "--n", "512", "--out", str(out)]) == 0
    names = sorted(os.listdir(out))
    assert "pdmp_density_20.csv" in names and "pdmp_density_50.csv" in names
    header, rows = read_rows(out / "convergence.csv")
    gaps = [float(r[1]) for r in rows]
    assert gaps[1] < gaps[0]


def test_check_hj_passes_on_the_transform(tmp_path):
    out = tmp_path / "run"
    assert run(["check-hj", "--field", TILTED, "--n", "1024",
                "--out", str(out)]) == 0
    data = json.loads((out / "hj.json").read_text())
    assert data["all_pass"] is True
    assert sorted(data["hamiltonians"]) == ["guarded-quartic", "quadratic",
                                            "shifted-cosh"]
    for rep in data["hamiltonians"].values():
        assert rep["verdict"] is True


def test_check_hj_failure_still_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    rc = run(["check-hj", "--field", TILTED, "--n", "1024",
              "--tau", "1e-15", "--out", str(out)])
    assert rc == 3
    assert "numerical check failed" in capsys.readouterr().err
    data = json.loads((out / "hj.json").read_text())
    assert data["all_pass"] is False
    assert (out / "manifest.json").exists()


def test_fw_report_with_enumeration(tmp_path):
    out = tmp_path / "run"
    assert run(["fw", "--field", "sin(4*pi*x)", "--n", "512", "--brute",
                "--out", str(out)]) == 0
    data = json.loads((out / "fw.json").read_text())
    assert data["ell"] == 2
    np.testing.assert_allclose(data["w_stable"], 1.0 / (2.0 * np.pi),
                               atol=1e-6)
    assert data["pisolo_gap"] <= 1e-6
    assert data["pisolo_constant"] == pytest.approx(1.0 / np.pi, abs=1e-6)
    assert data["equivalence_gap"] <= 1e-8
    assert len(data["trees"]) == 2
    for entry in data["brute_force"]:
        assert entry["gap"] <= 1e-9
    header, _ = read_rows(out / "fw.csv")
    assert header == ["x", "w", "rate", "case", "neighbors"]


def test_compare_report(tmp_path):
    out = tmp_path / "run"
    assert run(["compare", "--field", SIN, "--eps", "0.4,0.3", "--n", "512",
                "--T", "50", "--out", str(out)]) == 0
    data = json.loads((out / "gap_report.json").read_text())
    assert data["route_gap"] <= 1e-10
    assert data["monotone_decreasing"] is True
    assert all(data["viscosity"].values())
    assert data["identities"]["equivalence_gap"] <= 1e-6
    assert data["tv_distance"] <= 0.2
    assert sorted(os.listdir(out)) == ["fw.csv", "gap_report.json",
                                       "manifest.json", "phi.csv"]


def test_thread_sweeps_do_not_change_bytes(tmp_path, monkeypatch):
    serial = tmp_path / "serial"
    threaded = tmp_path / "threaded"
    args = ["density", "--field", TILTED, "--eps", "0.4,0.3,0.2", "--n", "512"]
    assert run(args + ["--out", str(serial)]) == 0
    monkeypatch.setenv("QUASIPOT_THREADS", "3")
    assert run(args + ["--out", str(threaded)]) == 0
    for name in os.listdir(serial):
        if name.endswith(".csv"):
            assert filecmp.cmp(serial / name, threaded / name,
                               shallow=False), name


def test_plot_artifacts_are_deterministic(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert run(["phi", "--field", TILTED, "--n", "512", "--plot",
                    "--out", str(out)]) == 0
    svg = (outs[0] / "phi.svg").read_text()
    assert svg.startswith("<?xml") and "<svg" in svg
    assert svg.endswith("\n") and not svg.endswith("\n\n")
    assert filecmp.cmp(outs[0] / "phi.svg", outs[1] / "phi.svg",
                       shallow=False)


def test_installed_entry_points():
    proc = subprocess.run([sys.executable, "-m", "quasipot", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "phi" in proc.stdout and "check-hj" in proc.stdout
    assert shutil.which("quasipot") is not None
