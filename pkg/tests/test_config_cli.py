"""Config parsing, setup construction, and the command-line entry point."""

import csv
import math
import os

import numpy as np
import pytest

import pdconsensus as pd
from pdconsensus import cli
from pdconsensus.config import (
    ConfigError,
    build_setup,
    load_config,
    parse_config_text,
)

QUAD_RING4 = """
algorithm = first_order
mode = theorem
seed = 3

problem.kind = quadratic
problem.n = 4
problem.p = 3
problem.seed = 23

graph.kind = ring
graph.n = 4

params.mode = auto

run.T = 50
"""

QUAD_PRACTICAL_EXPLICIT = """
algorithm = first_order
mode = practical
seed = 3

problem.kind = quadratic
problem.n = 4
problem.p = 3
problem.seed = 23

graph.kind = ring
graph.n = 4

params.alpha = 2.0
params.beta = 1.0
params.eta = 0.02

run.T = 80
"""


def write_cfg(tmp_path, text, name="case.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# parsing


def test_parse_config_text_basic():
    mapping = parse_config_text("a = 1\n# comment\n\nb.c = two  # trailing\n")
    assert mapping == {"a": "1", "b.c": "two"}


def test_parse_errors_name_source_and_line():
    with pytest.raises(ConfigError, match=r"mycfg:3"):
        parse_config_text("a = 1\n\nnot a pair\n", source="mycfg")
    with pytest.raises(ConfigError, match=r"empty key or value"):
        parse_config_text("a =\n")
    with pytest.raises(ConfigError, match=r"duplicate key 'a'"):
        parse_config_text("a = 1\na = 2\n")


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config("/no/such/file.cfg")


# ---------------------------------------------------------------------------
# build_setup


def test_build_setup_wires_everything():
    setup = build_setup(parse_config_text(QUAD_RING4))
    assert setup.problem.name.startswith("quadratic")
    assert setup.graph.n == 4
    assert setup.run_config.mode == "theorem"
    assert setup.run_config.rounds == 50
    assert setup.run_config.seed == 3
    assert not setup.figures
    # auto selection must agree with calling the selector directly
    pc = pd.ProblemConstants.from_parts(setup.problem, setup.spectral)
    chosen = pd.select_first_order_params(pc)
    assert setup.run_config.alpha == chosen.alpha
    assert setup.run_config.beta == chosen.beta
    assert setup.run_config.eta == chosen.eta


def test_build_setup_overrides_win():
    mapping = parse_config_text(QUAD_RING4)
    setup = build_setup(mapping, mode_override="practical", seed_override=99)
    assert setup.run_config.mode == "practical"
    assert setup.run_config.seed == 99


def test_build_setup_rejects_unknown_keys():
    mapping = parse_config_text(QUAD_RING4 + "bogus.key = 1\n")
    with pytest.raises(ConfigError, match="unknown config keys: bogus.key"):
        build_setup(mapping)


def test_build_setup_rejects_bad_values():
    with pytest.raises(ConfigError, match="algorithm"):
        build_setup({"algorithm": "newton"})
    mapping = parse_config_text(QUAD_RING4.replace("run.T = 50",
                                                   "run.T = soon"))
    with pytest.raises(ConfigError, match="expected int"):
        build_setup(mapping)
    mapping = parse_config_text(QUAD_RING4.replace("mode = theorem",
                                                   "mode = sideways"))
    with pytest.raises(ConfigError, match="mode"):
        build_setup(mapping)


def test_build_setup_shape_mismatch():
    mapping = parse_config_text(QUAD_RING4.replace("graph.n = 4",
                                                   "graph.n = 5"))
    with pytest.raises(ConfigError, match="graph.n = 5"):
        build_setup(mapping)


def test_build_setup_delta_only_for_zeroth_order():
    mapping = parse_config_text(QUAD_RING4 + "delta.delta0 = 1e-3\n")
    with pytest.raises(ConfigError, match="zeroth_order"):
        build_setup(mapping)


def test_build_setup_zeroth_defaults_schedule():
    text = QUAD_RING4.replace("algorithm = first_order",
                              "algorithm = zeroth_order")
    setup = build_setup(parse_config_text(text))
    sched = setup.run_config.schedule
    assert sched.kind == "geometric"
    assert sched.delta0 == 1e-2
    assert sched.eps_hat == 0.99


def test_build_setup_unknown_graph_kind():
    mapping = parse_config_text(QUAD_RING4.replace("graph.kind = ring",
                                                   "graph.kind = torus"))
    with pytest.raises(ConfigError, match="graph.kind"):
        build_setup(mapping)


# ---------------------------------------------------------------------------
# preset resolution


def test_list_presets():
    assert cli.list_presets() == [
        "logistic_rgg20_practical",
        "logistic_rgg20_zeroth_practical",
        "ls_rgg5_theorem",
        "quadratic_path2_theorem",
        "quadratic_ring4_theorem",
        "sine_ring4_theorem",
        "sine_ring4_zeroth_theorem",
    ]


def test_resolve_config_preset_and_path(tmp_path):
    by_name = cli.resolve_config("quadratic_path2_theorem")
    by_ext = cli.resolve_config("quadratic_path2_theorem.cfg")
    assert by_name == by_ext
    assert by_name["graph.kind"] == "path"

    path = write_cfg(tmp_path, QUAD_RING4)
    assert cli.resolve_config(path)["graph.kind"] == "ring"

    with pytest.raises(ConfigError, match="presets:"):
        cli.resolve_config("quadratic_path3_theorem")


def test_all_presets_build():
    for name in cli.list_presets():
        setup = build_setup(cli.resolve_config(name))
        assert setup.run_config.rounds > 0


# ---------------------------------------------------------------------------
# params subcommand


def test_params_exit_ok_and_writes_constants(tmp_path, capsys):
    out = str(tmp_path / "rep")
    code = cli.main(["params", "--config", "quadratic_path2_theorem",
                     "--out", out])
    assert code == cli.EXIT_OK
    text = capsys.readouterr().out
    assert "kappa1 = " in text
    assert "eta_max = " in text
    assert "# feasibility" in text
    saved = open(os.path.join(out, "constants.txt")).read()
    assert "eta_max = " in saved
    assert "# feasibility" in saved


def test_params_exit_infeasible(tmp_path, capsys):
    # alpha below the window and an enormous stepsize: nothing certifies
    bad = QUAD_RING4.replace("params.mode = auto",
                             "params.alpha = 0.1\nparams.beta = 10.0\n"
                             "params.eta = 0.5")
    path = write_cfg(tmp_path, bad)
    code = cli.main(["params", "--config", path])
    assert code == cli.EXIT_INFEASIBLE
    capsys.readouterr()


# ---------------------------------------------------------------------------
# run subcommand


def read_summary(out):
    lines = {}
    for raw in open(os.path.join(out, "summary.txt")):
        key, _, val = raw.partition(" = ")
        lines[key.strip()] = val.strip()
    return lines


def test_run_writes_outputs(tmp_path, capsys):
    path = write_cfg(tmp_path, QUAD_RING4)
    out = str(tmp_path / "out")
    code = cli.main(["run", "--config", path, "--out", out])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    for name in ("trace.csv", "metrics.csv", "constants.txt", "summary.txt"):
        assert os.path.isfile(os.path.join(out, name))

    summary = read_summary(out)
    assert summary["algorithm"] == "first_order"
    assert summary["mode"] == "theorem"
    assert summary["rounds"] == "50"
    assert summary["diverged_at"] == "none"
    assert summary["descent_violations"] == "0"
    assert summary["envelope_violations_total"] == "0"

    # the reported final progress must match the emitted metrics file
    with open(os.path.join(out, "metrics.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 50
    assert int(rows[-1]["queries"]) == 50 * 4
    assert int(rows[-1]["scalars"]) == 50 * 4 * 3
    assert math.isclose(float(summary["final_P"]), float(rows[-1]["P"]),
                        rel_tol=1e-9)

    records = pd.read_trace_csv(os.path.join(out, "trace.csv"))
    assert len(records) == 51
    assert records[0].k == 0


def test_run_practical_mode_override(tmp_path, capsys):
    path = write_cfg(tmp_path, QUAD_RING4)
    out = str(tmp_path / "out")
    code = cli.main(["run", "--config", path, "--out", out,
                     "--mode", "practical", "--seed", "12"])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    summary = read_summary(out)
    assert summary["mode"] == "practical"
    assert summary["seed"] == "12"
    # no certificate in practical mode, so no constants report
    assert not os.path.exists(os.path.join(out, "constants.txt"))


def test_run_zero_rounds(tmp_path, capsys):
    path = write_cfg(tmp_path, QUAD_RING4.replace("run.T = 50", "run.T = 0"))
    out = str(tmp_path / "out")
    assert cli.main(["run", "--config", path, "--out", out]) == cli.EXIT_OK
    capsys.readouterr()
    records = pd.read_trace_csv(os.path.join(out, "trace.csv"))
    assert len(records) == 1
    assert read_summary(out)["final_P"] == "nan"


def test_run_exit_config_error(tmp_path, capsys):
    path = write_cfg(tmp_path, "this is not a config\n")
    assert cli.main(["run", "--config", path,
                     "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_run_exit_diverged(tmp_path, capsys):
    wild = QUAD_PRACTICAL_EXPLICIT.replace("params.eta = 0.02",
                                           "params.eta = 5.0")
    path = write_cfg(tmp_path, wild)
    out = str(tmp_path / "out")
    code = cli.main(["run", "--config", path, "--out", out])
    assert code == cli.EXIT_DIVERGED
    captured = capsys.readouterr()
    assert "diverged at round" in captured.err
    summary = read_summary(out)
    assert summary["diverged_at"] != "none"


def test_run_exit_violation_with_negative_slack(tmp_path, capsys):
    # negative slack turns the descent check into "must improve by more than
    # the certificate promises", which an honest run cannot do every round
    path = write_cfg(tmp_path, QUAD_RING4 + "diagnostics.slack = -1\n")
    out = str(tmp_path / "out")
    code = cli.main(["run", "--config", path, "--out", out])
    assert code == cli.EXIT_VIOLATION
    capsys.readouterr()
    summary = read_summary(out)
    assert int(summary["descent_violations"]) > 0


def test_run_renders_figures(tmp_path, capsys):
    path = write_cfg(tmp_path, QUAD_RING4 + "out.figures = true\n")
    out = str(tmp_path / "out")
    assert cli.main(["run", "--config", path, "--out", out]) == cli.EXIT_OK
    capsys.readouterr()
    assert os.path.getsize(os.path.join(out, "progress.png")) > 0
    assert os.path.getsize(os.path.join(out, "energy.png")) > 0


# ---------------------------------------------------------------------------
# compare subcommand


def test_compare_self_is_exact(tmp_path, capsys):
    path = write_cfg(tmp_path, QUAD_PRACTICAL_EXPLICIT)
    out = str(tmp_path / "out")
    code = cli.main(["compare", "--config", path, "--out", out])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    summary = read_summary(out)
    assert float(summary["max_abs_deviation"]) == 0.0
    with open(os.path.join(out, "deviation.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 81
    assert all(float(r["max_abs"]) == 0.0 for r in rows)


def test_compare_window_and_figures(tmp_path, capsys):
    path = write_cfg(tmp_path,
                     QUAD_PRACTICAL_EXPLICIT + "out.figures = true\n")
    out = str(tmp_path / "out")
    code = cli.main(["compare", "--config", path, "--out", out,
                     "--window", "10"])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    with open(os.path.join(out, "deviation.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 11
    assert os.path.getsize(os.path.join(out, "deviation.png")) > 0


def test_compare_zeroth_vs_first_order(tmp_path, capsys):
    zo = QUAD_PRACTICAL_EXPLICIT.replace(
        "algorithm = first_order",
        "algorithm = zeroth_order").replace(
        "run.T = 80", "run.T = 40\ndelta.kind = constant\ndelta.delta0 = 1e-7")
    path_a = write_cfg(tmp_path, QUAD_PRACTICAL_EXPLICIT, "a.cfg")
    path_b = write_cfg(tmp_path, zo, "b.cfg")
    out = str(tmp_path / "out")
    code = cli.main(["compare", "--config", path_a, "--config-b", path_b,
                     "--out", out])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    summary = read_summary(out)
    assert summary["algorithm_a"] == "first_order"
    assert summary["algorithm_b"] == "zeroth_order"
    assert summary["rounds_compared"] == "41"
    assert float(summary["max_relative_deviation"]) < 1e-4


def test_compare_shape_mismatch(tmp_path, capsys):
    small = QUAD_PRACTICAL_EXPLICIT.replace("problem.n = 4", "problem.n = 3") \
                                   .replace("graph.n = 4", "graph.n = 3")
    path_a = write_cfg(tmp_path, QUAD_PRACTICAL_EXPLICIT, "a.cfg")
    path_b = write_cfg(tmp_path, small, "b.cfg")
    code = cli.main(["compare", "--config", path_a, "--config-b", path_b,
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG
    assert "cannot compare" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep subcommand


def test_sweep_grid(tmp_path, capsys):
    cfg = QUAD_PRACTICAL_EXPLICIT + \
        "sweep.param = params.eta\nsweep.values = 0.01, 0.05, 5.0, oops\n"
    path = write_cfg(tmp_path, cfg)
    out = str(tmp_path / "out")
    assert cli.main(["sweep", "--config", path, "--out", out]) == cli.EXIT_OK
    capsys.readouterr()
    with open(os.path.join(out, "sweep.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["status"] for r in rows] == ["ok", "ok", "diverged", "error"]
    assert rows[0]["error"] == ""
    assert "float" in rows[3]["error"]
    assert float(rows[0]["final_P"]) > 0
    assert float(rows[1]["final_P"]) > 0


def test_sweep_point_matches_run(tmp_path, capsys):
    run_out = str(tmp_path / "run")
    path = write_cfg(tmp_path, QUAD_PRACTICAL_EXPLICIT)
    assert cli.main(["run", "--config", path,
                     "--out", run_out]) == cli.EXIT_OK
    swept = QUAD_PRACTICAL_EXPLICIT + \
        "sweep.param = params.eta\nsweep.values = 0.02\n"
    sweep_out = str(tmp_path / "sweep")
    sweep_path = write_cfg(tmp_path, swept, "sweep.cfg")
    assert cli.main(["sweep", "--config", sweep_path,
                     "--out", sweep_out]) == cli.EXIT_OK
    capsys.readouterr()
    with open(os.path.join(sweep_out, "sweep.csv")) as fh:
        row = list(csv.DictReader(fh))[0]
    summary = read_summary(run_out)
    assert math.isclose(float(row["final_P"]), float(summary["final_P"]),
                        rel_tol=1e-12)


def test_sweep_requires_grid(tmp_path, capsys):
    path = write_cfg(tmp_path, QUAD_PRACTICAL_EXPLICIT)
    assert cli.main(["sweep", "--config", path,
                     "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    empty = QUAD_PRACTICAL_EXPLICIT + \
        "sweep.param = params.eta\nsweep.values = ,\n"
    path = write_cfg(tmp_path, empty, "empty.cfg")
    assert cli.main(["sweep", "--config", path,
                     "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    capsys.readouterr()
