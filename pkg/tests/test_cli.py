import csv
import json
import subprocess
import sys

import pytest

from rabiqpt.cli import build_parser, run_cli
from rabiqpt.fock import FockSpace, ed_observables, ground_state_ed
from rabiqpt.model import ModulationParams, SystemParams, effective_model, reduced_model
from rabiqpt.phases import phase_point, reduced_couplings

SUBCOMMANDS = ["effective", "phase", "sweep", "ed", "fidelity", "a2", "boundary"]


def run_json(capsys, *argv):
    code = run_cli([*argv, "--format", "json"])
    out = capsys.readouterr().out
    assert code == 0
    return json.loads(out)


def test_effective_example(capsys):
    out = run_json(capsys, "effective", "--eta", "100", "--nu", "0.68", "--g", "0.06",
                   "--xi", "1.5")
    m = out["model"]
    assert m["selection"]["n0"] == m["selection"]["m0"] == -1
    assert m["eta_eff"] == pytest.approx(32)
    assert m["g_C"] == pytest.approx(0.028284, abs=1e-6)
    direct = effective_model(SystemParams.from_eta(100, g=0.06), ModulationParams(1.5, 0.68))
    assert m["g_C"] == direct.g_C and m["g_r"] == direct.g_r
    assert out["rwa"]["passed"] is False


def test_phase_sxpa(capsys):
    out = run_json(capsys, "phase", "--lambda", "0", "--mu", "2.5")
    res = out["result"]
    assert res["label"] == "SXPa" and res["excitation"] == 0.0 and res["var_p"] == "inf"


def test_phase_is_bit_exact(capsys):
    out = run_json(capsys, "phase", "--xi", "1.5")
    m = effective_model(SystemParams.from_eta(100, g=0.06), ModulationParams(1.5, 0.68))
    direct = phase_point(reduced_couplings(m), m)
    assert out["result"]["x_mean"] == direct.x_mean
    assert out["result"]["ground_energy"] == direct.ground_energy


def test_sweep_preset_to_csv(tmp_path, capsys):
    path = tmp_path / "fig5.csv"
    assert run_cli(["sweep", "--preset", "fig5", "--out", str(path)]) == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 300
    omega = [float(r["omega"]) for r in rows]
    xi = [float(r["xi"]) for r in rows]
    low = sorted(range(300), key=lambda i: omega[i])[:2]
    assert sorted(round(xi[i], 1) for i in low) == [1.1, 2.6]


def test_ed_matches_library(capsys):
    out = run_json(capsys, "ed", "--eta-eff", "100", "--lambda", "0.5", "--mu", "0.5",
                   "--n-max", "40")
    res = ground_state_ed(reduced_model(100, 0.5, 0.5), FockSpace(40))
    assert out["gap"] == res.gap
    assert out["observables"]["n_mean"] == ed_observables(res.states[:, 0], FockSpace(40)).n_mean


def test_a2_and_boundary(capsys):
    assert run_cli(["a2", "--eta", "100", "--g", "0.06", "--chi", "0.058"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert float(lines[1].split(",")[2]) == pytest.approx(0.01, abs=5e-4)
    assert run_cli(["boundary", "--nu", "0.402", "--count", "5", "--kappa", "0.002"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "xi,g_C,g_tilde_C,g_C_diss" and len(lines) == 6


def test_fidelity_command(capsys):
    assert run_cli(["fidelity", "--t-max", "0.2", "--points", "3", "--n-max", "12"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,fidelity" and len(lines) == 4


def test_usage_errors(capsys):
    assert run_cli(["sweep", "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "--bogus" in err and "[axes]" in err
    assert run_cli(["sweep"]) == 1
    assert run_cli(["sweep", "--preset", "fig99"]) == 1
    assert run_cli(["effective", "--nu", "-1"]) == 1
    assert run_cli([]) == 1
    assert run_cli(["ed", "--lambda", "0.5"]) == 1
    assert run_cli(["sweep", "--preset", "fig5", "--xi", "1.0"]) == 1


def test_numerical_failure_exit_code(capsys):
    code = run_cli(["ed", "--eta-eff", "100", "--lambda", "1.5", "--mu", "1.5", "--n-max", "10"])
    assert code == 2
    assert "CutoffTooSmall" in capsys.readouterr().err


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_lists_units(cmd, capsys):
    assert run_cli([cmd, "--help"]) == 0
    text = capsys.readouterr().out
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices[cmd]
    for action in sub._actions:
        if action.option_strings and action.dest not in ("help",):
            assert action.option_strings[-1] in text
    assert "omega0" in text or "[count]" in text or "dimensionless" in text


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[fixed]\neta = 100\nnu = 0.68\ng = 0.05\nxi = 1.5\n")
    out = run_json(capsys, "effective", "--config", str(cfg))
    assert out["parameters"]["g"] == 0.05
    out = run_json(capsys, "effective", "--config", str(cfg), "--g", "0.06")
    assert out["parameters"]["g"] == 0.06


def test_sweep_config_and_jobs_env(tmp_path, monkeypatch):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[axes]\nxi = 0, 3, 20\n[fixed]\neta = 100\nnu = 0.68\n"
                   "[quantities]\nphase\nomega\n")
    monkeypatch.setenv("RABIQPT_JOBS", "2")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(["sweep", "--config", str(cfg), "--out", str(a)]) == 0
    assert run_cli(["sweep", "--config", str(cfg), "--out", str(b), "--jobs", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("RABIQPT_JOBS", "many")
    assert run_cli(["sweep", "--config", str(cfg), "--out", str(a)]) == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rabiqpt.cli", "phase", "--lambda", "0",
                           "--mu", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and "label = N" in proc.stdout
