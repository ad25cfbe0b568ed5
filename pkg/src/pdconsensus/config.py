"""Plain-text run configuration.

One `dotted.key = value` pair per line, `#` comments, blank lines ignored.
Sections: problem.* (kind plus its parameters), graph.* (kind plus its
parameters), params.* (explicit gains or the auto-selection knobs), delta.*
(sampling-radius schedule), run.T, diagnostics.*, out.figures, and the
top-level algorithm / mode / seed.  Unknown or malformed keys raise
ConfigError naming the key and, for files, the line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import ALGORITHMS, RunConfig
from .graphs import (
    Graph,
    SpectralData,
    complete_graph,
    load_edge_list,
    path_graph,
    random_geometric_graph,
    ring_graph,
    spectral_data,
)
from .params import (
    ProblemConstants,
    select_first_order_params,
    select_zeroth_order_params,
)
from .problems import problem_from_spec
from .zeroth import DeltaSchedule

__all__ = ["ConfigError", "parse_config_text", "load_config",
           "RunSetup", "build_setup"]


class ConfigError(Exception):
    """A configuration value is missing, malformed, or unknown."""


def parse_config_text(text: str, source: str = "<config>") -> dict:
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not key or not val:
            raise ConfigError(f"{source}:{lineno}: empty key or value in {line!r}")
        if key in mapping:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        mapping[key] = val
    return mapping


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


class _Taker:
    """Pops typed values out of the mapping so leftovers can be reported."""

    _MISSING = object()

    def __init__(self, mapping):
        self.left = dict(mapping)

    def take(self, key, default=_MISSING, cast=str):
        if key not in self.left:
            if default is self._MISSING:
                raise ConfigError(f"missing required key {key!r}")
            return default
        raw = self.left.pop(key)
        try:
            if cast is bool:
                low = raw.lower()
                if low in ("true", "yes", "1"):
                    return True
                if low in ("false", "no", "0"):
                    return False
                raise ValueError(raw)
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"{key} = {raw!r}: expected "
                              f"{cast.__name__}") from exc

    def section(self, prefix) -> dict:
        out = {}
        for key in list(self.left):
            if key.startswith(prefix + "."):
                out[key[len(prefix) + 1:]] = self.left.pop(key)
        return out

    def finish(self):
        if self.left:
            names = ", ".join(sorted(self.left))
            raise ConfigError(f"unknown config keys: {names}")


def _build_graph(t: _Taker) -> Graph:
    kind = t.take("graph.kind")
    if kind in ("ring", "path", "complete"):
        n = t.take("graph.n", cast=int)
        weight = t.take("graph.weight", 1.0, float)
        maker = {"ring": ring_graph, "path": path_graph,
                 "complete": complete_graph}[kind]
        try:
            return maker(n, weight)
        except ValueError as exc:
            raise ConfigError(f"graph: {exc}") from exc
    if kind == "random_geometric":
        n = t.take("graph.n", cast=int)
        radius = t.take("graph.radius", cast=float)
        seed = t.take("graph.seed", cast=int)
        try:
            return random_geometric_graph(n, radius, seed)
        except (ValueError, RuntimeError) as exc:
            raise ConfigError(f"graph: {exc}") from exc
    if kind == "file":
        path = t.take("graph.path")
        try:
            return load_edge_list(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"graph: {exc}") from exc
    raise ConfigError(f"graph.kind = {kind!r}: expected ring, path, complete, "
                      f"random_geometric, or file")


def _build_schedule(t: _Taker, algorithm: str) -> DeltaSchedule | None:
    spec = t.section("delta")
    if algorithm != "zeroth_order":
        if spec:
            raise ConfigError("delta.* keys only apply to algorithm = zeroth_order")
        return None
    kind = spec.pop("kind", "geometric")
    try:
        delta0 = float(spec.pop("delta0", "1e-2"))
        eps_hat = spec.pop("eps_hat", None)
        eps_hat = float(eps_hat) if eps_hat is not None else None
    except ValueError as exc:
        raise ConfigError(f"delta: {exc}") from exc
    if spec:
        raise ConfigError(f"unknown delta keys: {', '.join(sorted(spec))}")
    if kind == "geometric" and eps_hat is None:
        eps_hat = 0.99
    try:
        return DeltaSchedule(kind=kind, delta0=delta0, eps_hat=eps_hat)
    except ValueError as exc:
        raise ConfigError(f"delta: {exc}") from exc


@dataclass
class RunSetup:
    """A fully constructed run: problem, graph spectrum, and loop options."""

    problem: object
    graph: Graph
    spectral: SpectralData
    run_config: RunConfig
    figures: bool


def build_setup(mapping: dict, mode_override: str | None = None,
                seed_override: int | None = None) -> RunSetup:
    """Turn parsed key/value pairs into runnable objects.

    Command-line --mode/--seed land here as overrides so a preset can be
    re-run in either mode without editing the file.
    """
    t = _Taker(mapping)
    algorithm = t.take("algorithm", "first_order")
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm = {algorithm!r}: expected one of "
                          f"{', '.join(ALGORITHMS)}")
    mode = t.take("mode", "practical")
    if mode_override is not None:
        mode = mode_override
    if mode not in ("theorem", "practical"):
        raise ConfigError(f"mode = {mode!r}: expected theorem or practical")
    if seed_override is not None:
        t.take("seed", None, int)  # consumed; the override wins
        seed = seed_override
    else:
        seed = t.take("seed", None, int)
    rounds = t.take("run.T", 1000, int)
    figures = t.take("out.figures", False, bool)
    x_scale = t.take("init.x_scale", 1.0, float)
    slack = t.take("diagnostics.slack", 1e-9, float)
    divergence_limit = t.take("diagnostics.divergence_limit", 1e12, float)
    invariant_tol = t.take("diagnostics.invariant_tol", 1e-12, float)

    problem_spec = t.section("problem")
    if "kind" not in problem_spec:
        raise ConfigError("missing required key 'problem.kind'")
    if "shifts" in problem_spec:
        try:
            problem_spec["shifts"] = [float(s) for s in
                                      problem_spec["shifts"].split(",")]
        except ValueError as exc:
            raise ConfigError(f"problem.shifts: {exc}") from exc
    try:
        problem = problem_from_spec(problem_spec)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"problem: {exc}") from exc

    graph = _build_graph(t)
    try:
        spectral = spectral_data(graph)
    except ValueError as exc:
        raise ConfigError(f"graph spectrum: {exc}") from exc
    if graph.n != problem.n:
        raise ConfigError(f"graph.n = {graph.n} but problem has "
                          f"{problem.n} agents")

    schedule = _build_schedule(t, algorithm)
    kappa2 = t.take("params.kappa2", 2.0, float)
    params_mode = t.take("params.mode",
                         "explicit" if "params.alpha" in t.left else "auto")
    if params_mode == "explicit":
        alpha = t.take("params.alpha", cast=float)
        beta = t.take("params.beta", cast=float)
        eta = t.take("params.eta", cast=float)
    elif params_mode == "auto":
        beta_margin = t.take("params.beta_margin", 0.05, float)
        alpha_frac = t.take("params.alpha_frac", 0.5, float)
        eta_safety = t.take("params.eta_safety", 0.5, float)
        pc = ProblemConstants.from_parts(problem, spectral)
        try:
            if algorithm == "zeroth_order":
                eps_hat = (schedule.eps_hat
                           if schedule.kind == "geometric" else None)
                chosen = select_zeroth_order_params(
                    pc, kappa2, beta_margin, alpha_frac, eta_safety,
                    eps_hat=eps_hat)
            else:
                chosen = select_first_order_params(
                    pc, kappa2, beta_margin, alpha_frac, eta_safety)
        except ValueError as exc:
            raise ConfigError(f"params: {exc}") from exc
        alpha, beta, eta = chosen.alpha, chosen.beta, chosen.eta
    else:
        raise ConfigError(f"params.mode = {params_mode!r}: expected "
                          f"explicit or auto")
    t.finish()

    try:
        run_config = RunConfig(alpha=alpha, beta=beta, eta=eta,
                               algorithm=algorithm, rounds=rounds, mode=mode,
                               schedule=schedule, kappa2=kappa2, slack=slack,
                               divergence_limit=divergence_limit,
                               invariant_tol=invariant_tol, seed=seed,
                               x_scale=x_scale)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunSetup(problem=problem, graph=graph, spectral=spectral,
                    run_config=run_config, figures=figures)
