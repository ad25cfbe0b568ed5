"""Synchronous simulation of the gossip-plus-correction methods.

State is a pair of (n, p) arrays: row i is agent i's iterate and its dual
accumulator.  All mixing happens through the graph Laplacian acting on the
stacked array (L @ x), never through an explicit Kronecker lift.  One round
costs one force evaluation per agent (a gradient, or p+1 function values for
the forward-difference method) plus two Laplacian products.

`run` drives the loop and, in theorem mode, scores every round against the
per-step energy-decrease certificate and the closed-form envelopes, recording
everything in per-round records the diagnostics layer consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import (
    IterRecord,
    descent_residual_first_order,
    descent_residual_zeroth_order,
    estimator_stack,
    gradient_stack,
    linear_envelope,
    lyapunov_parts,
    zo_linear_envelope,
)
from .graphs import Graph, SpectralData, spectral_data
from .params import (
    FirstOrderConstants,
    ProblemConstants,
    ZerothOrderConstants,
    first_order_constants,
    zeroth_order_constants,
)
from .zeroth import DeltaSchedule

__all__ = [
    "ALGORITHMS",
    "NetworkState",
    "init_state",
    "step_first_order",
    "step_variant",
    "step_zeroth_order",
    "RunConfig",
    "Trace",
    "run",
    "state_trajectory",
    "extra_reference_trajectory",
]

ALGORITHMS = ("first_order", "first_order_variant", "zeroth_order")


@dataclass(frozen=True)
class NetworkState:
    """Stacked iterates and dual accumulators, one row per agent."""

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"state must be (agents, dim), got shape {x.shape}")
        if v.shape != x.shape:
            raise ValueError(f"dual shape {v.shape} != state shape {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)


def init_state(n: int, p: int, x0: np.ndarray | None = None,
               v0: np.ndarray | None = None, seed: int | None = None,
               x_scale: float = 1.0) -> NetworkState:
    """Fresh state: Gaussian rows (or `x0`) and zero (or `v0`) duals."""
    if x0 is None:
        rng = np.random.default_rng(seed)
        x = x_scale * rng.standard_normal((n, p))
    else:
        x = np.array(x0, dtype=float, copy=True)
        if x.shape != (n, p):
            raise ValueError(f"x0 shape {x.shape} != ({n}, {p})")
    if v0 is None:
        v = np.zeros((n, p))
    else:
        v = np.array(v0, dtype=float, copy=True)
        if v.shape != (n, p):
            raise ValueError(f"v0 shape {v.shape} != ({n}, {p})")
    return NetworkState(x=x, v=v)


def _advance(x, v, force, lap, alpha, beta, eta, variant):
    lap_x = lap @ x
    if variant:
        pull = lap @ (alpha * x + beta * v)
    else:
        pull = alpha * lap_x + beta * v
    x_next = x - eta * (pull + force)
    v_next = v + eta * beta * lap_x
    return x_next, v_next


def step_first_order(problem, lap: np.ndarray, state: NetworkState,
                     alpha: float, beta: float, eta: float) -> NetworkState:
    """One round with exact per-agent gradients."""
    force = gradient_stack(problem, state.x)
    x, v = _advance(state.x, state.v, force, lap, alpha, beta, eta, False)
    return NetworkState(x=x, v=v)


def step_variant(problem, lap: np.ndarray, state: NetworkState,
                 alpha: float, beta: float, eta: float) -> NetworkState:
    """One round of the form that mixes the dual through the Laplacian,
    making any dual initialization admissible."""
    force = gradient_stack(problem, state.x)
    x, v = _advance(state.x, state.v, force, lap, alpha, beta, eta, True)
    return NetworkState(x=x, v=v)


def step_zeroth_order(problem, lap: np.ndarray, state: NetworkState,
                      alpha: float, beta: float, eta: float,
                      delta: float) -> NetworkState:
    """One round with forward-difference estimates (p+1 values per agent)."""
    force = estimator_stack(problem, state.x, delta)
    x, v = _advance(state.x, state.v, force, lap, alpha, beta, eta, False)
    return NetworkState(x=x, v=v)


@dataclass(frozen=True)
class RunConfig:
    """Everything the run loop needs beyond problem and graph.

    mode "theorem" builds certificate constants from (alpha, beta, eta) and
    scores every round; "practical" just iterates and records.
    monitor_constants overrides the self-built set, so a run can be scored
    against a certificate computed for different parameters.
    """

    alpha: float
    beta: float
    eta: float
    algorithm: str = "first_order"
    rounds: int = 1000
    mode: str = "practical"
    schedule: DeltaSchedule | None = None
    kappa2: float = 2.0
    monitor_constants: FirstOrderConstants | ZerothOrderConstants | None = None
    slack: float = 1e-9
    divergence_limit: float = 1e12
    invariant_tol: float = 1e-12
    seed: int | None = None
    x_scale: float = 1.0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, "
                             f"got {self.algorithm!r}")
        if self.mode not in ("theorem", "practical"):
            raise ValueError(f"mode must be theorem or practical, got {self.mode!r}")
        if self.algorithm == "zeroth_order" and self.schedule is None:
            raise ValueError("zeroth_order needs a sampling-radius schedule")
        if min(self.alpha, self.beta, self.eta) <= 0:
            raise ValueError("alpha, beta, eta must be positive")
        if self.rounds < 0:
            raise ValueError(f"rounds must be >= 0, got {self.rounds}")


@dataclass
class Trace:
    """Everything one run produced; records row k describes round k."""

    records: list
    means: np.ndarray
    final: NetworkState
    constants: FirstOrderConstants | ZerothOrderConstants | None
    initial_hat: float | None
    descent_violations: int
    first_descent_violation: int | None
    invariant_violations: int
    first_invariant_violation: int | None
    diverged_at: int | None
    f_star_offset: bool
    config: RunConfig
    problem_name: str
    n: int
    p: int

    @property
    def ok(self) -> bool:
        return (self.diverged_at is None and self.descent_violations == 0
                and self.invariant_violations == 0)


def _build_constants(config, problem, spectral):
    if config.monitor_constants is not None:
        return config.monitor_constants
    if config.mode != "theorem" or config.algorithm == "first_order_variant":
        return None
    pc = ProblemConstants.from_parts(problem, spectral)
    if config.algorithm == "zeroth_order":
        eps_hat = (config.schedule.eps_hat
                   if config.schedule.kind == "geometric" else None)
        return zeroth_order_constants(pc, config.kappa2, config.alpha,
                                      config.beta, config.eta, eps_hat=eps_hat)
    return first_order_constants(pc, config.kappa2, config.alpha,
                                 config.beta, config.eta)


def _bad(arr, limit) -> bool:
    return not np.isfinite(arr).all() or np.abs(arr).max() > limit


def run(problem, graph: Graph | SpectralData, config: RunConfig,
        state: NetworkState | None = None) -> Trace:
    """Iterate for config.rounds rounds, recording one row per round.

    Descent monitoring (theorem mode) flags any round where the energy falls
    by less than the certificate demands, beyond slack * (1 + |V|).  The
    dual-sum conservation and exact mean-iterate recursion are checked every
    round in both modes.  On overflow past divergence_limit the loop stops
    and the trace reports where.
    """
    spectral = graph if isinstance(graph, SpectralData) else spectral_data(graph)
    n, p = problem.n, problem.dim
    if spectral.n != n:
        raise ValueError(f"graph has {spectral.n} nodes, problem has {n} agents")
    if state is None:
        state = init_state(n, p, seed=config.seed, x_scale=config.x_scale)
    if state.x.shape != (n, p):
        raise ValueError(f"state shape {state.x.shape} != ({n}, {p})")
    variant = config.algorithm == "first_order_variant"
    zeroth = config.algorithm == "zeroth_order"
    lap = spectral.laplacian

    x = state.x.copy()
    v = state.v.copy()
    v_sum0 = v.sum(axis=0)
    if not variant and np.abs(v_sum0).max() > config.invariant_tol * (
            1.0 + np.abs(v).max()):
        raise ValueError("dual rows must sum to zero for this method; "
                         "use the variant form for arbitrary duals")

    constants = _build_constants(config, problem, spectral)
    monitors_on = constants is not None and not variant
    f_star = problem.f_star
    f_star_offset = f_star is None
    if f_star_offset:
        f_star = 0.0

    env_on = False
    if monitors_on and not f_star_offset:
        if zeroth:
            env_on = (constants.eps_t is not None and constants.eps_hat is not None
                      and 0.0 < constants.eps_t < 0.125)
        else:
            env_on = constants.eps is not None and 0.0 < constants.eps < 0.125

    records = []
    means = np.empty((config.rounds + 1, p))
    prev_parts = None
    prev_delta = math.nan
    initial_hat = None
    descent_viol = 0
    first_descent = None
    invariant_viol = 0
    first_invariant = None
    diverged_at = None

    for k in range(config.rounds + 1):
        if _bad(x, config.divergence_limit) or _bad(v, config.divergence_limit):
            diverged_at = k
            break
        delta_k = config.schedule.delta_at(k) if zeroth else None
        if zeroth:
            force = estimator_stack(problem, x, delta_k)
        else:
            force = gradient_stack(problem, x)
        parts = lyapunov_parts(problem, spectral, x, v, config.alpha,
                               config.beta, force, delta=delta_k,
                               f_star=f_star)
        means[k] = x.mean(axis=0)
        if k == 0:
            initial_hat = parts.hat_value

        residual = math.nan
        if monitors_on and prev_parts is not None:
            if zeroth:
                residual = descent_residual_zeroth_order(
                    prev_parts, parts, constants, prev_delta, delta_k)
            else:
                residual = descent_residual_first_order(
                    prev_parts, parts, constants)
            if residual > config.slack * (1.0 + abs(prev_parts.value)):
                descent_viol += 1
                if first_descent is None:
                    first_descent = k

        envelope = math.nan
        if env_on:
            if zeroth:
                envelope = (constants.eps8 * initial_hat / constants.eps9
                            if k == 0
                            else zo_linear_envelope(constants, initial_hat, k - 1))
            else:
                envelope = linear_envelope(constants, initial_hat, k)

        records.append(IterRecord.from_parts(
            k, parts, n, zeroth=zeroth, residual=residual, envelope=envelope,
            delta=delta_k if zeroth else math.nan))

        if k == config.rounds:
            break
        x_next, v_next = _advance(x, v, force, lap, config.alpha,
                                  config.beta, config.eta, variant)
        # conservation of the dual sum and the exact mean-iterate recursion
        sum_dev = np.abs(v_next.sum(axis=0) - v_sum0).max()
        if sum_dev > config.invariant_tol * (1.0 + np.abs(v_next).max()):
            invariant_viol += 1
            if first_invariant is None:
                first_invariant = k + 1
        predicted_mean = x.mean(axis=0) - config.eta * force.mean(axis=0)
        mean_dev = np.abs(x_next.mean(axis=0) - predicted_mean).max()
        # rounding in the mean is set by the entry scale, not the (possibly
        # cancelled) mean itself, so that is the right relative yardstick
        mean_scale = 1.0 + max(float(np.abs(x_next).max()),
                               float(np.abs(predicted_mean).max()))
        if mean_dev > config.invariant_tol * mean_scale:
            invariant_viol += 1
            if first_invariant is None:
                first_invariant = k + 1
        prev_parts = parts
        prev_delta = delta_k if zeroth else math.nan
        x, v = x_next, v_next

    return Trace(records=records, means=means[:len(records)],
                 final=NetworkState(x=x, v=v), constants=constants,
                 initial_hat=initial_hat, descent_violations=descent_viol,
                 first_descent_violation=first_descent,
                 invariant_violations=invariant_viol,
                 first_invariant_violation=first_invariant,
                 diverged_at=diverged_at, f_star_offset=f_star_offset,
                 config=config, problem_name=problem.name, n=n, p=p)


def state_trajectory(problem, graph: Graph | SpectralData, config: RunConfig,
                     state: NetworkState | None = None):
    """Stacked iterates ((rounds+1, n, p)) without any diagnostics.

    Returns (trajectory, diverged_at); on overflow the trajectory is
    truncated to the rounds that stayed finite.
    """
    spectral = graph if isinstance(graph, SpectralData) else spectral_data(graph)
    n, p = problem.n, problem.dim
    if state is None:
        state = init_state(n, p, seed=config.seed, x_scale=config.x_scale)
    variant = config.algorithm == "first_order_variant"
    zeroth = config.algorithm == "zeroth_order"
    lap = spectral.laplacian
    x = state.x.copy()
    v = state.v.copy()
    xs = np.empty((config.rounds + 1, n, p))
    for k in range(config.rounds + 1):
        if _bad(x, config.divergence_limit) or _bad(v, config.divergence_limit):
            return xs[:k], k
        xs[k] = x
        if k == config.rounds:
            break
        if zeroth:
            force = estimator_stack(problem, x, config.schedule.delta_at(k))
        else:
            force = gradient_stack(problem, x)
        x, v = _advance(x, v, force, lap, config.alpha, config.beta,
                        config.eta, variant)
    return xs, None


def extra_reference_trajectory(problem, graph: Graph | SpectralData,
                               state: NetworkState, alpha: float, beta: float,
                               eta: float, rounds: int) -> np.ndarray:
    """Iterates of the equivalent single-sequence recursion.

    After one genuine round, the dual drops out: each new iterate is a
    two-tap combination of the previous two plus the force increment,
    mixed by I - eta*alpha*L and an extra eta^2*beta^2*L tap on the older
    iterate.  Returns the (rounds+1, n, p) trajectory for comparison with
    the two-sequence loop.
    """
    spectral = graph if isinstance(graph, SpectralData) else spectral_data(graph)
    lap = spectral.laplacian
    n, p = state.x.shape
    xs = np.empty((rounds + 1, n, p))
    xs[0] = state.x
    if rounds == 0:
        return xs
    g_prev = gradient_stack(problem, xs[0])
    xs[1] = xs[0] - eta * (alpha * (lap @ xs[0]) + beta * state.v + g_prev)
    for k in range(rounds - 1):
        g_cur = gradient_stack(problem, xs[k + 1])
        xs[k + 2] = (2.0 * xs[k + 1] - eta * alpha * (lap @ xs[k + 1])
                     - xs[k] + eta * alpha * (lap @ xs[k])
                     - eta * eta * beta * beta * (lap @ xs[k])
                     - eta * (g_cur - g_prev))
        g_prev = g_cur
    return xs
