"""Configuration-driven runner: constants reports, traces, comparisons, sweeps.

Every subcommand reads one plain-text config (a file path or the name of a
packaged preset) and writes delimited output plus a key = value summary into
--out.  Exit codes: 0 success, 2 config error, 3 divergence, 4 a monitored
guarantee was violated, 5 infeasible parameters (params subcommand).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from importlib import resources

import numpy as np

from .config import ConfigError, build_setup, load_config, parse_config_text
from .diagnostics import (
    check_envelope,
    check_projection_envelope,
    fit_rate,
    progress_series,
    write_metrics_csv,
    write_trace_csv,
)
from .engine import init_state, run, state_trajectory
from .params import (
    ProblemConstants,
    first_order_constants,
    zeroth_order_constants,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VIOLATION = 4
EXIT_INFEASIBLE = 5


# ---------------------------------------------------------------------------
# config resolution (path or packaged preset name)


def list_presets() -> list:
    root = resources.files("pdconsensus").joinpath("presets")
    return sorted(entry.name[:-4] for entry in root.iterdir()
                  if entry.name.endswith(".cfg"))


def resolve_config(value: str) -> dict:
    if os.path.isfile(value):
        return load_config(value)
    name = value[:-4] if value.endswith(".cfg") else value
    candidate = resources.files("pdconsensus").joinpath("presets", name + ".cfg")
    if candidate.is_file():
        return parse_config_text(candidate.read_text(), source=f"preset:{name}")
    raise ConfigError(f"no config file or preset named {value!r}; "
                      f"presets: {', '.join(list_presets())}")


# ---------------------------------------------------------------------------
# shared rendering


def _fmt(val) -> str:
    if isinstance(val, float):
        return f"{val:.12g}"
    if val is None:
        return "none"
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, (list, tuple)):
        return ",".join(str(v) for v in val) if val else "none"
    return str(val)


def _emit(lines, out_dir, filename):
    text = "\n".join(f"{k} = {_fmt(v)}" for k, v in lines) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        with open(os.path.join(out_dir, filename), "w") as fh:
            fh.write(text)


def _constants_for(setup):
    pc = ProblemConstants.from_parts(setup.problem, setup.spectral)
    rc = setup.run_config
    if rc.algorithm == "zeroth_order":
        eps_hat = (rc.schedule.eps_hat
                   if rc.schedule.kind == "geometric" else None)
        return zeroth_order_constants(pc, rc.kappa2, rc.alpha, rc.beta,
                                      rc.eta, eps_hat=eps_hat)
    return first_order_constants(pc, rc.kappa2, rc.alpha, rc.beta, rc.eta)


def _write_constants(constants, out_dir):
    lines = list(constants.as_dict().items())
    text = "\n".join(f"{k} = {_fmt(v)}" for k, v in lines)
    text += "\n# feasibility\n"
    text += "\n".join("# " + ln.strip() for ln in constants.feasibility.lines())
    text += "\n"
    with open(os.path.join(out_dir, "constants.txt"), "w") as fh:
        fh.write(text)


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------------------
# subcommands


def cmd_params(args) -> int:
    mapping = resolve_config(args.config)
    setup = build_setup(mapping, mode_override=args.mode,
                        seed_override=args.seed)
    constants = _constants_for(setup)
    for key, val in constants.as_dict().items():
        print(f"{key} = {_fmt(val)}")
    print("# feasibility")
    for line in constants.feasibility.lines():
        print("#" + line)
    if args.out is not None:
        _write_constants(constants, _out_dir(args))
    return EXIT_OK if constants.feasibility.ok else EXIT_INFEASIBLE


def _envelope_summaries(trace, setup):
    """Post-run guarantee checks; returns (summary lines, violation total)."""
    lines = []
    total = 0
    constants = trace.constants
    f_star = setup.problem.f_star
    if constants is None or trace.f_star_offset or trace.diverged_at is not None:
        return lines, total
    rc = setup.run_config
    zeroth = rc.algorithm == "zeroth_order"
    if not constants.feasibility.ok:
        lines.append(("envelope_note", "parameters infeasible; bounds not checked"))
        return lines, total

    def record(kind, report):
        nonlocal total
        total += report.violations
        lines.append((f"envelope_{kind}_violations", report.violations))
        lines.append((f"envelope_{kind}_worst_ratio", report.worst_ratio))

    if zeroth:
        kinds = [("zo_sum", {"schedule": rc.schedule}),
                 ("zo_gap", {"schedule": rc.schedule, "f_star": f_star})]
        if constants.eps_t is not None and constants.eps_hat is not None:
            kinds.append(("zo_linear", {"f_star": f_star}))
    else:
        kinds = [("sum_penalty", {}), ("gap", {"f_star": f_star})]
        if constants.eps is not None:
            kinds.append(("linear", {"f_star": f_star}))
    for kind, extra in kinds:
        try:
            report = check_envelope(trace.records, kind, constants,
                                    trace.initial_hat, slack=rc.slack, **extra)
        except ValueError as exc:
            lines.append((f"envelope_{kind}_note", str(exc)))
            continue
        record(kind, report)
    linear_ok = (constants.eps_t is not None and constants.eps_hat is not None
                 if zeroth else constants.eps is not None)
    if linear_ok and setup.problem.project_optimum is not None:
        try:
            report = check_projection_envelope(
                trace.records, trace.means, setup.problem, constants,
                trace.initial_hat, slack=rc.slack)
            record(report.kind, report)
        except ValueError as exc:
            lines.append(("envelope_projection_note", str(exc)))
    return lines, total


def _run_summary(trace, setup, source):
    rc = setup.run_config
    prog = progress_series(trace.records, trace.n)
    final_p = prog[-1][1] if prog else math.nan
    f_star = setup.problem.f_star
    if f_star is not None:
        series = [r.consensus_sq + trace.n * (r.f_bar - f_star)
                  for r in trace.records]
    else:
        series = [v for _, v in prog]
    fit = (fit_rate(series) if len(series) >= 4
           else fit_rate(series, window=len(series)) if len(series) >= 2
           else None)
    lines = [
        ("command", "run"),
        ("config", source),
        ("problem", trace.problem_name),
        ("algorithm", rc.algorithm),
        ("mode", rc.mode),
        ("agents", trace.n),
        ("dim", trace.p),
        ("rounds", rc.rounds),
        ("seed", rc.seed),
        ("alpha", rc.alpha),
        ("beta", rc.beta),
        ("eta", rc.eta),
        ("f_star_offset", trace.f_star_offset),
        ("feasible", trace.constants.feasibility.ok
         if trace.constants is not None else None),
        ("diverged_at", trace.diverged_at),
        ("descent_violations", trace.descent_violations),
        ("first_descent_violation", trace.first_descent_violation),
        ("invariant_violations", trace.invariant_violations),
        ("first_invariant_violation", trace.first_invariant_violation),
        ("final_P", final_p),
        ("fitted_ratio", fit.ratio if fit else math.nan),
        ("fitted_points", fit.points_used if fit else 0),
        ("fitted_skipped_nonpositive", fit.skipped_nonpositive if fit else 0),
    ]
    env_lines, env_violations = _envelope_summaries(trace, setup)
    lines.extend(env_lines)
    lines.append(("envelope_violations_total", env_violations))
    return lines, env_violations


def cmd_run(args) -> int:
    mapping = resolve_config(args.config)
    setup = build_setup(mapping, mode_override=args.mode,
                        seed_override=args.seed)
    out = _out_dir(args)
    trace = run(setup.problem, setup.spectral, setup.run_config)
    write_trace_csv(os.path.join(out, "trace.csv"), trace.records)
    write_metrics_csv(os.path.join(out, "metrics.csv"), trace.records,
                      trace.n, trace.p, setup.run_config.algorithm)
    if trace.constants is not None:
        _write_constants(trace.constants, out)
    lines, env_violations = _run_summary(trace, setup, args.config)
    _emit(lines, out, "summary.txt")
    if setup.figures:
        from . import figures
        zeroth = setup.run_config.algorithm == "zeroth_order"
        per_q = trace.n * (trace.p + 1) if zeroth else trace.n
        metrics = [(k, v, k * per_q, k * trace.n * trace.p)
                   for k, v in progress_series(trace.records, trace.n)]
        figures.render_progress(metrics, os.path.join(out, "progress.png"),
                                title=trace.problem_name)
        figures.render_energy(trace.records, os.path.join(out, "energy.png"),
                              title=trace.problem_name)
    if trace.diverged_at is not None:
        print(f"# diverged at round {trace.diverged_at}", file=sys.stderr)
        return EXIT_DIVERGED
    if (trace.descent_violations or trace.invariant_violations
            or env_violations):
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_compare(args) -> int:
    mapping_a = resolve_config(args.config)
    mapping_b = resolve_config(args.config_b if args.config_b else args.config)
    setup_a = build_setup(mapping_a, mode_override=args.mode,
                          seed_override=args.seed)
    setup_b = build_setup(mapping_b, mode_override=args.mode,
                          seed_override=args.seed)
    if (setup_a.problem.n, setup_a.problem.dim) != (setup_b.problem.n,
                                                    setup_b.problem.dim):
        raise ConfigError(
            f"cannot compare: sides have shapes "
            f"({setup_a.problem.n}, {setup_a.problem.dim}) vs "
            f"({setup_b.problem.n}, {setup_b.problem.dim})")
    out = _out_dir(args)
    rc_a, rc_b = setup_a.run_config, setup_b.run_config
    state = init_state(setup_a.problem.n, setup_a.problem.dim,
                       seed=rc_a.seed, x_scale=rc_a.x_scale)
    xs_a, div_a = state_trajectory(setup_a.problem, setup_a.spectral, rc_a,
                                   state)
    xs_b, div_b = state_trajectory(setup_b.problem, setup_b.spectral, rc_b,
                                   state)
    shared = min(len(xs_a), len(xs_b))
    window = shared if args.window is None else min(args.window + 1, shared)
    rows = []
    for k in range(window):
        dev = float(np.abs(xs_a[k] - xs_b[k]).max())
        rel = dev / (1.0 + float(np.abs(xs_a[k]).max()))
        rows.append((k, dev, rel))
    with open(os.path.join(out, "deviation.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("k", "max_abs", "relative"))
        for k, dev, rel in rows:
            writer.writerow((k, f"{dev:.17g}", f"{rel:.17g}"))
    lines = [
        ("command", "compare"),
        ("config_a", args.config),
        ("config_b", args.config_b if args.config_b else args.config),
        ("algorithm_a", rc_a.algorithm),
        ("algorithm_b", rc_b.algorithm),
        ("seed", rc_a.seed),
        ("window", window - 1),
        ("rounds_compared", len(rows)),
        ("max_abs_deviation", max((r[1] for r in rows), default=math.nan)),
        ("max_relative_deviation", max((r[2] for r in rows), default=math.nan)),
        ("diverged_a", div_a),
        ("diverged_b", div_b),
    ]
    _emit(lines, out, "summary.txt")
    if setup_a.figures or setup_b.figures:
        from . import figures
        figures.render_deviation(rows, os.path.join(out, "deviation.png"),
                                 title="trajectory deviation")
    if div_a is not None or div_b is not None:
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_sweep(args) -> int:
    mapping = resolve_config(args.config)
    param = mapping.pop("sweep.param", None)
    raw_values = mapping.pop("sweep.values", None)
    if param is None or raw_values is None:
        raise ConfigError("sweep needs sweep.param and sweep.values")
    values = [v.strip() for v in raw_values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep.values is empty")
    out = _out_dir(args)
    header = ("index", "value", "status", "feasible", "descent_violations",
              "invariant_violations", "diverged_at", "final_P",
              "fitted_ratio", "error")
    rows = []
    for idx, value in enumerate(values):
        point = dict(mapping)
        point[param] = value
        try:
            setup = build_setup(point, mode_override=args.mode,
                                seed_override=args.seed)
            trace = run(setup.problem, setup.spectral, setup.run_config)
            lines, env_violations = _run_summary(trace, setup, args.config)
            summary = dict(lines)
            if trace.diverged_at is not None:
                status = "diverged"
            elif (trace.descent_violations or trace.invariant_violations
                  or env_violations):
                status = "violation"
            else:
                status = "ok"
            rows.append((idx, value, status, summary["feasible"],
                         trace.descent_violations, trace.invariant_violations,
                         trace.diverged_at, summary["final_P"],
                         summary["fitted_ratio"], ""))
        except (ConfigError, ValueError) as exc:
            rows.append((idx, value, "error", None, None, None, None,
                         math.nan, math.nan, str(exc)))
    with open(os.path.join(out, "sweep.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])
    for row in rows:
        print(" ".join(f"{name}={_fmt(cell)}"
                       for name, cell in zip(header, row)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub, out_default=None):
    sub.add_argument("--config", required=True,
                     help="config file path or packaged preset name")
    sub.add_argument("--out", default=out_default,
                     help="output directory (created if missing)")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    sub.add_argument("--mode", choices=("theorem", "practical"), default=None,
                     help="override the config mode")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pdconsensus",
        description="Distributed consensus optimization runner: certificate "
                    "constants, monitored runs, trajectory comparisons, and "
                    "parameter sweeps.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_params = subs.add_parser("params",
                               help="compute window/certificate constants")
    _add_common(p_params)

    p_run = subs.add_parser("run", help="run one experiment and write traces")
    _add_common(p_run, out_default="out")

    p_compare = subs.add_parser("compare",
                                help="compare two runs from a shared start")
    _add_common(p_compare, out_default="out")
    p_compare.add_argument("--config-b", default=None,
                           help="second config (defaults to --config)")
    p_compare.add_argument("--window", type=int, default=None,
                           help="compare only rounds 0..window")

    p_sweep = subs.add_parser("sweep",
                              help="run a grid over one config key")
    _add_common(p_sweep, out_default="out")

    args = parser.parse_args(argv)
    handler = {"params": cmd_params, "run": cmd_run,
               "compare": cmd_compare, "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
