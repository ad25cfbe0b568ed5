"""Measurement layer: energy functions, descent monitors, trace records.

The run loop produces one `IterRecord` per round; everything here works on
those records (or on raw state arrays) and never mutates engine state.  The
quadratic-form conventions are stacked: norms over (n, p) arrays sum across
agents, so the consensus term is sum_i ||x_i - xbar||^2 and the mean-force
term carries an explicit factor n.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .params import (
    FirstOrderConstants,
    ZerothOrderConstants,
    gap_envelope,
    linear_envelope,
    projected_linear_envelope,
    sum_penalty_envelope,
    zo_gap_envelope,
    zo_linear_envelope,
    zo_projected_linear_envelope,
    zo_sum_envelope,
)
from .zeroth import estimate_gradient

__all__ = [
    "gradient_stack",
    "estimator_stack",
    "LyapunovParts",
    "lyapunov_parts",
    "descent_residual_first_order",
    "descent_residual_zeroth_order",
    "IterRecord",
    "TRACE_COLUMNS",
    "write_trace_csv",
    "read_trace_csv",
    "write_metrics_csv",
    "progress_series",
    "EnvelopeReport",
    "check_envelope",
    "check_projection_envelope",
    "projection_gap_margins",
    "RateFit",
    "fit_rate",
    "pl_margins",
    "pl_violations",
]


def gradient_stack(problem, x: np.ndarray) -> np.ndarray:
    """Per-agent gradients, each evaluated at that agent's own row."""
    return np.stack([o.gradient(x[i]) for i, o in enumerate(problem.oracles)])


def estimator_stack(problem, x: np.ndarray, delta: float) -> np.ndarray:
    """Per-agent forward-difference estimates at the agents' own rows."""
    return np.stack([estimate_gradient(o, x[i], delta)
                     for i, o in enumerate(problem.oracles)])


def _stack_at_mean(problem, x_bar: np.ndarray, delta: float | None) -> np.ndarray:
    if delta is None:
        return np.stack([o.gradient(x_bar) for o in problem.oracles])
    return np.stack([estimate_gradient(o, x_bar, delta)
                     for o in problem.oracles])


# ---------------------------------------------------------------------------
# energy functions


@dataclass(frozen=True)
class LyapunovParts:
    """Stacked quadratic components of the descent energy at one round.

    `value` is the energy the per-step monitor differences; `hat_value` is
    the looser combination sandwiched around it that the envelopes use;
    `penalty_*` are the per-round summands of the cumulative bounds.
    """

    consensus_sq: float      # sum_i ||x_i - xbar||^2
    dual_k_sq: float         # centered squared norm of v + (at-mean force)/beta
    dual_q_sq: float         # same vector through the Laplacian pseudoinverse
    cross: float             # centered inner product of state and dual parts
    gap: float               # n * (f(xbar) - f_star)
    f_bar: float
    mean_force_sq: float     # n * ||mean_i force_i||^2
    grad_at_mean_sq: float   # n * ||grad f(xbar)||^2, always the true gradient
    alpha: float
    beta: float

    @property
    def value(self) -> float:
        return (0.5 * self.consensus_sq
                + 0.5 * (self.dual_q_sq + (self.alpha / self.beta) * self.dual_k_sq)
                + self.cross + self.gap)

    @property
    def hat_value(self) -> float:
        return self.consensus_sq + self.dual_k_sq + self.gap

    @property
    def penalty_first_order(self) -> float:
        return (self.consensus_sq + self.dual_k_sq
                + self.mean_force_sq + self.grad_at_mean_sq)

    @property
    def penalty_zeroth_order(self) -> float:
        return self.consensus_sq + self.grad_at_mean_sq


def lyapunov_parts(problem, spectral, x: np.ndarray, v: np.ndarray,
                   alpha: float, beta: float, force: np.ndarray,
                   delta: float | None = None,
                   f_star: float | None = None) -> LyapunovParts:
    """Evaluate the energy components at state (x, v).

    `force` is the stack the step actually applied (gradients or estimates at
    the agents' own rows); only its mean enters.  `delta` switches the
    at-the-mean reference stack from true gradients to forward differences.
    `f_star` defaults to the problem's optimum; pass 0.0 to track offset
    energies when the optimum is unknown (differences stay meaningful).
    """
    x_bar = x.mean(axis=0)
    at_mean = _stack_at_mean(problem, x_bar, delta)
    w = v + at_mean / beta
    xc = x - x_bar
    wc = w - w.mean(axis=0)
    qw = spectral.pseudoinverse @ w
    if f_star is None:
        f_star = problem.f_star
        if f_star is None:
            raise ValueError("problem has no known optimum; pass f_star "
                             "explicitly (0.0 gives offset energies)")
    n = problem.n
    f_bar = problem.global_value(x_bar)
    grad_bar = problem.global_gradient(x_bar)
    force_mean = force.mean(axis=0)
    return LyapunovParts(
        consensus_sq=float(np.vdot(xc, xc).real),
        dual_k_sq=float(np.vdot(wc, wc).real),
        dual_q_sq=float(np.vdot(w, qw).real),
        cross=float(np.vdot(xc, wc).real),
        gap=n * (f_bar - f_star),
        f_bar=f_bar,
        mean_force_sq=n * float(np.vdot(force_mean, force_mean).real),
        grad_at_mean_sq=n * float(np.vdot(grad_bar, grad_bar).real),
        alpha=alpha,
        beta=beta,
    )


def descent_residual_first_order(prev: LyapunovParts, cur: LyapunovParts,
                                 fo: FirstOrderConstants) -> float:
    """Signed slack of the one-round energy decrease; <= 0 when it holds."""
    eta = fo.eta
    drop = (eta * (fo.eps1 - eta * fo.eps2) * prev.consensus_sq
            + eta * (fo.eps3 - eta * fo.eps4) * prev.dual_k_sq
            + eta * (fo.eps5 - eta * fo.eps6) * prev.mean_force_sq
            + 0.25 * eta * prev.grad_at_mean_sq)
    return cur.value - prev.value + drop


def descent_residual_zeroth_order(prev: LyapunovParts, cur: LyapunovParts,
                                  zo: ZerothOrderConstants,
                                  delta_prev: float, delta_cur: float) -> float:
    """Same signed slack for forward-difference agents; the sampling radii
    of the two adjacent rounds enter as priced credits."""
    eta = zo.eta
    drop = (eta * (zo.eps1_t - eta * zo.eps2_t) * prev.consensus_sq
            + eta * (zo.eps3 - eta * zo.eps4) * prev.dual_k_sq
            + eta * (zo.eps5_t - eta * zo.eps6_t) * prev.mean_force_sq
            + 0.125 * eta * prev.grad_at_mean_sq)
    credit = zo.eps11 * delta_prev ** 2 + zo.eps12 * delta_cur ** 2
    return cur.value - prev.value + drop - credit


# ---------------------------------------------------------------------------
# per-round records and delimited output


TRACE_COLUMNS = ("k", "consensus_sq", "mean_grad_sq", "grad_at_mean_sq",
                 "f_bar", "V", "V_hat", "W", "dual_term", "residual",
                 "envelope", "delta")


@dataclass(frozen=True)
class IterRecord:
    """One row of the trace; column meanings match TRACE_COLUMNS.

    All norm-squared columns use the stacked convention: mean_grad_sq is
    n * ||mean_i force_i||^2 and grad_at_mean_sq is n * ||grad f(xbar)||^2,
    so W is literally the per-round summand of the cumulative bounds.
    residual on row k scores the step from round k-1, so row 0 holds nan.
    """

    k: int
    consensus_sq: float
    mean_grad_sq: float
    grad_at_mean_sq: float
    f_bar: float
    V: float
    V_hat: float
    W: float
    dual_term: float
    residual: float
    envelope: float
    delta: float

    @classmethod
    def from_parts(cls, k: int, parts: LyapunovParts, n: int, *,
                   zeroth: bool, residual: float = math.nan,
                   envelope: float = math.nan,
                   delta: float = math.nan) -> "IterRecord":
        w = parts.penalty_zeroth_order if zeroth else parts.penalty_first_order
        return cls(k=k,
                   consensus_sq=parts.consensus_sq,
                   mean_grad_sq=parts.mean_force_sq,
                   grad_at_mean_sq=parts.grad_at_mean_sq,
                   f_bar=parts.f_bar,
                   V=parts.value,
                   V_hat=parts.hat_value,
                   W=w,
                   dual_term=parts.dual_k_sq,
                   residual=residual,
                   envelope=envelope,
                   delta=delta)


def write_trace_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in records:
            writer.writerow([r.k] + [f"{getattr(r, c):.17g}"
                                     for c in TRACE_COLUMNS[1:]])


def read_trace_csv(path) -> list:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header in {path}: {header}")
        for row in reader:
            records.append(IterRecord(int(row[0]),
                                      *[float(cell) for cell in row[1:]]))
    return records


def progress_series(records, n: int) -> list:
    """Running best of ||grad f(xbar)||^2 + (1/n) sum_i ||x_i - xbar||^2,
    taken over rounds 1..k.  Returns (k, value) pairs for k >= 1."""
    out = []
    best = math.inf
    for r in records:
        if r.k < 1:
            continue
        best = min(best, (r.grad_at_mean_sq + r.consensus_sq) / n)
        out.append((r.k, best))
    return out


def write_metrics_csv(path, records, n: int, p: int, algorithm: str) -> None:
    """Progress metric against rounds, oracle queries, and variables moved.

    queries counts per-agent oracle calls (p+1 function values per round for
    the forward-difference method, one gradient otherwise); scalars counts
    variables communicated, n*p per round for every method.
    """
    zeroth = algorithm == "zeroth_order"
    per_round_queries = n * (p + 1) if zeroth else n
    per_round_scalars = n * p
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("k", "P", "queries", "scalars"))
        for k, val in progress_series(records, n):
            writer.writerow((k, f"{val:.17g}",
                             k * per_round_queries, k * per_round_scalars))


# ---------------------------------------------------------------------------
# envelope checks


@dataclass(frozen=True)
class EnvelopeReport:
    kind: str
    rows: tuple            # (k, measured, bound) triples
    violations: int
    first_violation: int | None
    worst_ratio: float     # max measured / bound over positive bounds

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _report(kind, triples, slack):
    violations = 0
    first = None
    worst = -math.inf
    for k, measured, bound in triples:
        if bound > 0:
            worst = max(worst, measured / bound)
        if measured > bound * (1.0 + slack):
            violations += 1
            if first is None:
                first = k
    return EnvelopeReport(kind=kind, rows=tuple(triples), violations=violations,
                          first_violation=first, worst_ratio=worst)


def check_envelope(records, kind: str, constants, initial_hat: float, *,
                   f_star: float | None = None, schedule=None,
                   slack: float = 1e-9) -> EnvelopeReport:
    """Compare a trace against one of the closed-form guarantees.

    kinds: sum_penalty | gap | linear | zo_sum | zo_gap | zo_linear.
    The gap kinds need `f_star`; the zo kinds need the sampling `schedule`
    (sum/gap) or a geometric eps_hat on the constants (linear).
    """
    n = constants.pc.n
    triples = []
    if kind == "sum_penalty":
        bound = sum_penalty_envelope(constants, initial_hat)
        running = 0.0
        for r in records:
            running += r.W
            triples.append((r.k, running, bound))
    elif kind == "gap":
        if f_star is None:
            raise ValueError("gap check needs f_star")
        bound = gap_envelope(constants, initial_hat)
        for r in records:
            if r.k >= 1:
                triples.append((r.k, n * (r.f_bar - f_star), bound))
    elif kind == "linear":
        if f_star is None:
            raise ValueError("linear check needs f_star")
        for r in records:
            measured = r.consensus_sq + n * (r.f_bar - f_star)
            triples.append((r.k, measured,
                            linear_envelope(constants, initial_hat, r.k)))
    elif kind == "zo_sum":
        bound = zo_sum_envelope(constants, initial_hat, schedule)
        running = 0.0
        for r in records:
            running += r.W
            triples.append((r.k, running, bound))
    elif kind == "zo_gap":
        if f_star is None:
            raise ValueError("zo_gap check needs f_star")
        bound = zo_gap_envelope(constants, initial_hat, schedule)
        for r in records:
            if r.k >= 1:
                triples.append((r.k, n * (r.f_bar - f_star), bound))
    elif kind == "zo_linear":
        if f_star is None:
            raise ValueError("zo_linear check needs f_star")
        for r in records:
            measured = r.consensus_sq + n * (r.f_bar - f_star)
            bound = (constants.eps8 * initial_hat / constants.eps9 if r.k == 0
                     else zo_linear_envelope(constants, initial_hat, r.k - 1))
            triples.append((r.k, measured, bound))
    else:
        raise ValueError(f"unknown envelope kind {kind!r}")
    return _report(kind, triples, slack)


def _projection_distance_sq(records, means, problem):
    """Stacked squared distance ||x_k - 1 (x) P(xbar_k)||^2 per round:
    consensus part plus n times the mean's distance to the minimizer set."""
    if problem.project_optimum is None:
        raise ValueError(f"problem {problem.name!r} has no minimizer projection")
    n = problem.n
    out = []
    for r, xb in zip(records, means):
        proj = problem.project_optimum(xb)
        d = xb - proj
        out.append((r.k, r.consensus_sq + n * float(np.vdot(d, d).real)))
    return out


def check_projection_envelope(records, means, problem, constants,
                              initial_hat: float, *,
                              slack: float = 1e-9) -> EnvelopeReport:
    """Stacked squared distance to the consensus minimizer against the
    (1 + 1/(2 nu))-inflated linear-rate envelope."""
    zeroth = isinstance(constants, ZerothOrderConstants)
    triples = []
    for k, measured in _projection_distance_sq(records, means, problem):
        if zeroth:
            bound = (constants.eps8 * initial_hat / constants.eps9
                     * (1.0 + 1.0 / (2.0 * constants.pc.pl_constant))
                     if k == 0
                     else zo_projected_linear_envelope(constants, initial_hat, k - 1))
        else:
            bound = projected_linear_envelope(constants, initial_hat, k)
        triples.append((k, measured, bound))
    kind = "zo_linear_projected" if zeroth else "linear_projected"
    return _report(kind, triples, slack)


def projection_gap_margins(records, means, problem,
                           f_star: float | None = None) -> list:
    """Pointwise slack of the distance-vs-gap inequality, per round:

        (1 + 1/(2 nu)) * (||x - xbar||^2 + n (f(xbar) - f*))
            - ||x - 1 (x) P(xbar)||^2

    The inflate factor assumes f(y) - f* >= 2 nu dist(y, X*)^2.  When nu
    is the tight gradient-dominance constant that growth bound can fail
    (a strongly convex quadratic misses it by 4x), so negative margins
    here flag the growth factor, not a broken run.  Returns (k, margin)
    pairs.
    """
    if problem.pl_constant is None:
        raise ValueError("pointwise projection check needs a "
                         "gradient-dominance constant")
    if f_star is None:
        f_star = problem.f_star
    if f_star is None:
        raise ValueError("pointwise projection check needs f_star")
    n = problem.n
    inflate = 1.0 + 1.0 / (2.0 * problem.pl_constant)
    out = []
    for (k, measured), r in zip(_projection_distance_sq(records, means, problem),
                                records):
        gap_side = inflate * (r.consensus_sq + n * (r.f_bar - f_star))
        out.append((k, gap_side - measured))
    return out


# ---------------------------------------------------------------------------
# rate fitting and P-L spot checks


@dataclass(frozen=True)
class RateFit:
    ratio: float               # per-round geometric factor exp(slope)
    points_used: int
    skipped_nonpositive: int


def fit_rate(values, window: int | None = None) -> RateFit:
    """Least-squares slope of log(values[k]) over the last `window` entries
    (tail half by default), reported as the per-round ratio exp(slope).

    Nonpositive entries cannot be logged and are skipped (counted); fewer
    than two usable points yields ratio nan.
    """
    vals = np.asarray(values, dtype=float)
    if window is None:
        window = len(vals) - len(vals) // 2
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    start = max(0, len(vals) - window)
    ks, logs, skipped = [], [], 0
    for k in range(start, len(vals)):
        if vals[k] > 0:
            ks.append(k)
            logs.append(math.log(vals[k]))
        else:
            skipped += 1
    if len(ks) < 2:
        return RateFit(ratio=math.nan, points_used=len(ks),
                       skipped_nonpositive=skipped)
    slope = np.polyfit(ks, logs, 1)[0]
    return RateFit(ratio=math.exp(slope), points_used=len(ks),
                   skipped_nonpositive=skipped)


def pl_margins(problem, points: np.ndarray,
               nu: float | None = None) -> np.ndarray:
    """0.5 ||grad f(x)||^2 - nu (f(x) - f_star) at each row of `points`;
    nonnegative everywhere the gradient-dominance constant is honest."""
    if nu is None:
        nu = problem.pl_constant
    if nu is None or problem.f_star is None:
        raise ValueError("problem lacks a gradient-dominance constant or optimum")
    out = np.empty(len(points))
    for j, x in enumerate(points):
        g = problem.global_gradient(x)
        out[j] = (0.5 * float(np.vdot(g, g).real)
                  - nu * (problem.global_value(x) - problem.f_star))
    return out


def pl_violations(problem, points: np.ndarray, nu: float | None = None,
                  slack: float = 1e-12) -> list:
    """Sample points where gradient dominance fails beyond slack.
    Returns (index, margin) pairs with negative margins."""
    margins = pl_margins(problem, points, nu)
    scale = 1.0 + np.abs(margins).max() if len(margins) else 1.0
    return [(j, float(m)) for j, m in enumerate(margins)
            if m < -slack * scale]
