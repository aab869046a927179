import json
import os

import pytest

from mfqsolve.cli import CliConfig, build_parser, main, resolve

SUBCOMMANDS = ["bell", "measure", "solve", "baseline", "ensemble", "resources",
               "fig2-left", "fig2-right", "fig3", "error-growth"]


@pytest.fixture(autouse=True)
def no_env_outdir(monkeypatch, tmp_path):
    monkeypatch.delenv("MFQSOLVE_OUTDIR", raising=False)
    monkeypatch.chdir(tmp_path)


def test_solve_fig2_parameters(capsys):
    code = main(["solve", "--alpha", "2", "--x0", "0.1", "--dt", "0.05", "--steps", "30", "--copies", "15"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0] == "step,t,x_quantum"
    assert len(out) == 32
    assert out[2] == "1,0.05,0.10490000000000001"


def test_solve_with_shots(capsys):
    assert main(["solve", "--steps", "3", "--copies", "4", "--shots", "1e4", "--seed", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "step,t,x_quantum,x_sampled_abs"
    assert abs(float(out[1].split(",")[3]) - 0.1) < 0.02


def test_resources_lorenz(capsys):
    code = main(["resources", "--vars", "3", "--steps", "100", "--ancilla", "100",
                 "--depth", "1e29", "--gate-time", "1e-9"])
    out = capsys.readouterr().out
    assert code == 0
    row = next(line for line in out.splitlines() if line.startswith("runtime_s"))
    assert row.split()[1] == "1e+20"
    assert "655" in out and "823" in out and "665" in out


def test_resources_csv(tmp_path, capsys):
    assert main(["resources", "--outdir", str(tmp_path / "r")]) == 0
    text = (tmp_path / "r" / "resources.csv").read_text()
    assert text.startswith("quantity,computed,paper_printed\n")
    assert (tmp_path / "r" / "resources.meta.json").exists()


def test_too_few_copies_is_usage_error(capsys):
    code = main(["solve", "--copies", "2", "--alpha", "2"])
    err = capsys.readouterr().err
    assert code == 1
    assert "N >= 3" in err


def test_unknown_flag(capsys):
    assert main(["solve", "--bogus", "1"]) == 1
    assert "unrecognized arguments" in capsys.readouterr().err


def test_missing_subcommand(capsys):
    assert main([]) == 1


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_everywhere(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    assert "--seed" in capsys.readouterr().out


def test_resource_error_exit_code(capsys):
    assert main(["solve", "--copies", "22"]) == 2
    assert "budget" in capsys.readouterr().err


def test_bad_number(capsys):
    assert main(["solve", "--steps", "2.5"]) == 1
    assert main(["solve", "--dt", "abc"]) == 1


def test_scientific_notation(capsys):
    assert main(["baseline", "--steps", "1e1", "--dt", "5e-2"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 12


def test_bell_and_measure(capsys):
    assert main(["bell"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "index,re,im" and len(out) == 5
    assert main(["measure", "--state", "bell", "--shots", "1000", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,count"
    assert {line.split(",")[0] for line in lines[1:]} <= {"0", "3"}


def test_ensemble_with_noise(capsys):
    assert main(["ensemble", "--alpha", "8", "--size", "20", "--noise-sigma", "0.01"]) == 0
    head = capsys.readouterr().out.splitlines()[0]
    assert head == "step,t,x_euler,x_ensemble,x_euler_maruyama"


def test_stdout_mode_writes_nothing(tmp_path, capsys):
    for cmd in (["bell"], ["solve", "--steps", "2", "--copies", "3"], ["baseline"], ["ensemble"], ["resources"]):
        assert main(cmd) == 0
    assert os.listdir(tmp_path) == []


def test_figure_writes_only_into_outdir(tmp_path, capsys):
    out = tmp_path / "figs"
    assert main(["fig2-right", "--steps", "3", "--copies", "4", "--outdir", str(out), "--format", "csv"]) == 0
    assert os.listdir(tmp_path) == ["figs"]
    assert sorted(os.listdir(out)) == ["fig2_right.csv", "fig2_right.meta.json"]
    meta = json.loads((out / "fig2_right.meta.json").read_text())
    assert meta["overrides"] == {"steps": 3, "n_copies": 4}


def test_env_var_sets_outdir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MFQSOLVE_OUTDIR", str(tmp_path / "env"))
    assert main(["baseline", "--steps", "2"]) == 0
    assert (tmp_path / "env" / "baseline.csv").exists()


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 8.0, "steps": 4, "x0": 0.2}))
    args = build_parser().parse_args(["baseline", "--config", str(cfg), "--steps", "6"])
    conf, explicit = resolve(args)
    assert conf.params["alpha"] == 8.0 and conf.params["x0"] == 0.2
    assert conf.params["steps"] == 6
    assert {"alpha", "x0", "steps"} <= explicit


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["baseline", "--config", str(bad)]) == 1
    bad.write_text(json.dumps({"copies": 3}))
    assert main(["baseline", "--config", str(bad)]) == 1


@pytest.mark.parametrize("argv, meta_name", [
    (["baseline", "--alpha", "16", "--steps", "7"], "baseline.meta.json"),
    (["solve", "--steps", "3", "--copies", "4", "--seed", "11"], "solve.meta.json"),
    (["fig3", "--steps", "5", "--copies", "3", "--sigma", "0.01", "--format", "csv"], "fig3.meta.json"),
])
def test_metadata_round_trip(tmp_path, argv, meta_name, capsys):
    out = str(tmp_path / "o")
    full = argv + ["--outdir", out]
    original, _ = resolve(build_parser().parse_args(full))
    assert main(full) == 0
    meta = json.loads((tmp_path / "o" / meta_name).read_text())
    echoed = CliConfig.from_dict(meta["cli_config"])
    assert echoed == original
    again, _ = resolve(build_parser().parse_args([argv[0], "--config", str(tmp_path / "o" / meta_name),
                                                  "--outdir", out] + (["--format", "csv"] if "fig3" in argv else [])))
    assert again == original


def test_error_growth_cli(tmp_path, capsys):
    assert main(["error-growth", "--ns", "3,4", "--outdir", str(tmp_path / "e"), "--format", "csv"]) == 0
    lines = (tmp_path / "e" / "error_growth.csv").read_text().splitlines()
    assert lines[0] == "N,step,deviation" and len(lines) == 1 + 2 * 9
