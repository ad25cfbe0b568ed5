"""Stepsize/gain windows and certificate constants for the two methods.

Everything here is closed-form arithmetic in the problem data (gradient
smoothness L, Laplacian spectrum extremes rho2 <= rho, optional P-L constant
nu) and the three run parameters (consensus gain alpha, dual gain beta,
stepsize eta).  The derived quantities fall into three groups:

* kappa* thresholds delimiting the admissible (alpha, beta) region;
* eps1..eps6 penalty brackets whose positivity pins the eta window, plus the
  aggregate rates eps7..eps10 entering the convergence envelopes;
* zeroth-order variants (suffix `_t`) with the extra sampling-error terms
  eps11/eps12.

Infeasibility is data, not an exception: constants are computed for any
positive inputs and the attached report lists each violated condition by
name with its margin, so sweeps can chart feasibility regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .zeroth import DeltaSchedule, delta_square_sum

__all__ = [
    "ProblemConstants",
    "Condition",
    "Feasibility",
    "FirstOrderConstants",
    "ZerothOrderConstants",
    "first_order_constants",
    "zeroth_order_constants",
    "select_first_order_params",
    "select_zeroth_order_params",
    "geometric_cross_sum_bound",
    "sum_penalty_envelope",
    "gap_envelope",
    "linear_envelope",
    "projected_linear_envelope",
    "zo_envelope_scale",
    "zo_sum_envelope",
    "zo_gap_envelope",
    "zo_linear_envelope",
    "zo_projected_linear_envelope",
]


@dataclass(frozen=True)
class ProblemConstants:
    """Problem/graph data every window depends on."""

    n: int
    p: int
    smoothness: float
    rho: float
    rho2: float
    pl_constant: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"need n >= 1 and p >= 1, got n={self.n}, p={self.p}")
        if self.smoothness <= 0 or self.rho <= 0 or self.rho2 <= 0:
            raise ValueError("smoothness and Laplacian extremes must be positive")
        if self.rho2 > self.rho * (1 + 1e-12):
            raise ValueError(f"rho2={self.rho2} exceeds rho={self.rho}")

    @classmethod
    def from_parts(cls, problem, spectral) -> "ProblemConstants":
        if problem.n != spectral.n:
            raise ValueError(
                f"problem has {problem.n} agents but graph has {spectral.n} nodes")
        return cls(n=problem.n, p=problem.dim, smoothness=problem.smoothness,
                   rho=spectral.rho, rho2=spectral.rho2,
                   pl_constant=problem.pl_constant)


@dataclass(frozen=True)
class Condition:
    """One named feasibility condition; margin > 0 means satisfied."""

    name: str
    satisfied: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class Feasibility:
    conditions: tuple

    @property
    def ok(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def violated(self) -> list:
        return [c for c in self.conditions if not c.satisfied]

    def margins(self) -> dict:
        return {c.name: c.margin for c in self.conditions}

    def lines(self) -> list:
        out = []
        for c in self.conditions:
            mark = "ok " if c.satisfied else "VIOLATED"
            out.append(f"  [{mark}] {c.name}: {c.detail} (margin {c.margin:.6g})")
        return out


def _window_conditions(kind, pc, kappa2, alpha, beta, eta,
                       kappa1, kappa3, kappa4, eta_max, brackets):
    conds = [
        Condition("kappa2_gt_1", kappa2 > 1.0, kappa2 - 1.0,
                  f"kappa2 = {kappa2:.6g} must exceed 1"),
        Condition("beta_window", beta > max(kappa1 / (kappa2 - 1.0), kappa3, kappa4)
                  if kappa2 > 1.0 else False,
                  beta - max(kappa1 / (kappa2 - 1.0), kappa3, kappa4)
                  if kappa2 > 1.0 else -math.inf,
                  f"beta = {beta:.6g} must exceed "
                  f"max(kappa1/(kappa2-1), kappa3, kappa4)"),
        Condition("alpha_window_lower", alpha > beta + kappa1,
                  alpha - (beta + kappa1),
                  f"alpha = {alpha:.6g} must exceed beta + kappa1 = "
                  f"{beta + kappa1:.6g}"),
        Condition("alpha_window_upper", alpha <= kappa2 * beta,
                  kappa2 * beta - alpha,
                  f"alpha = {alpha:.6g} must not exceed kappa2*beta = "
                  f"{kappa2 * beta:.6g}"),
        Condition("eta_window", 0.0 < eta < eta_max, eta_max - eta,
                  f"eta = {eta:.6g} must lie in (0, {eta_max:.6g})"),
    ]
    for name, val in brackets:
        conds.append(Condition(name, val > 0.0, val,
                               f"{name} = {val:.6g} must be positive"))
    return Feasibility(conditions=tuple(conds))


# ---------------------------------------------------------------------------
# first-order constants


@dataclass(frozen=True)
class FirstOrderConstants:
    """Windows, penalty brackets, and envelope rates for gradient agents."""

    pc: ProblemConstants
    kappa2: float
    alpha: float
    beta: float
    eta: float
    kappa1: float = field(init=False, default=0.0)
    kappa3: float = field(init=False, default=0.0)
    kappa4: float = field(init=False, default=0.0)
    eps1: float = field(init=False, default=0.0)
    eps2: float = field(init=False, default=0.0)
    eps3: float = field(init=False, default=0.0)
    eps4: float = field(init=False, default=0.0)
    eps5: float = field(init=False, default=0.0)
    eps6: float = field(init=False, default=0.0)
    eps7: float = field(init=False, default=0.0)
    eps8: float = field(init=False, default=0.0)
    eps9: float = field(init=False, default=0.0)
    eps10: float | None = field(init=False, default=None)
    eps: float | None = field(init=False, default=None)
    eta_max: float = field(init=False, default=0.0)
    feasibility: Feasibility = field(init=False, default=None)

    def __post_init__(self):
        pc, a, b, eta = self.pc, self.alpha, self.beta, self.eta
        if a <= 0 or b <= 0 or eta <= 0:
            raise ValueError("alpha, beta, eta must be positive")
        L, r, r2 = pc.smoothness, pc.rho, pc.rho2
        k2 = self.kappa2
        s = object.__setattr__
        s(self, "kappa1", (2.0 + 3.0 * L * L) / (2.0 * r2))
        s(self, "kappa3", 0.25 * (1.0 + math.sqrt(1.0 + 8.0 * k2 + 8.0 / r2)))
        t = k2 + 1.0 / r2
        s(self, "kappa4", t * L * L + math.sqrt(t * t * L * L + 2.0) * L)
        s(self, "eps1", (a - b) * r2 - 0.5 * (2.0 + 3.0 * L * L))
        s(self, "eps2", b * b * r + (2.0 * a * a + b * b) * r * r + 2.5 * L * L)
        s(self, "eps3", b - 0.5 - a / (2.0 * b * b) - 1.0 / (2.0 * b * r2))
        s(self, "eps4", 2.0 * b * b + 0.5)
        s(self, "eps5", 0.25 - (1.0 / (2.0 * b)) * (1.0 / b + 1.0 / r2 + a / b) * L * L)
        s(self, "eps6", (1.0 / (b * b)) * (1.0 + 1.0 / r2 + a / b) * L * L
          + L * (1.0 + L) / 2.0)
        s(self, "eps7", eta * min(self.eps1 - eta * self.eps2,
                                  self.eps3 - eta * self.eps4,
                                  self.eps5 - eta * self.eps6, 0.25))
        s(self, "eps8", (a + b) / (2.0 * b) + 1.0 / (2.0 * r2))
        s(self, "eps9", min(1.0 / (2.0 * r), (a - b) / (2.0 * a)))
        ratios = [self.eps1 / self.eps2 if self.eps2 > 0 else math.inf,
                  self.eps3 / self.eps4 if self.eps4 > 0 else math.inf,
                  self.eps5 / self.eps6 if self.eps6 > 0 else math.inf]
        s(self, "eta_max", min(ratios))
        brackets = [("eps1_minus_eta_eps2", self.eps1 - eta * self.eps2),
                    ("eps3_minus_eta_eps4", self.eps3 - eta * self.eps4),
                    ("eps5_minus_eta_eps6", self.eps5 - eta * self.eps6)]
        if pc.pl_constant is not None:
            nu = pc.pl_constant
            s(self, "eps10", eta * min(self.eps1 - eta * self.eps2,
                                       self.eps3 - eta * self.eps4, nu / 2.0))
            s(self, "eps", self.eps10 / self.eps8)
            brackets.append(("eps_in_unit_range",
                             min(self.eps, 0.125 - self.eps)
                             if self.eps is not None else -math.inf))
        s(self, "feasibility", _window_conditions(
            "first_order", pc, k2, a, b, eta,
            self.kappa1, self.kappa3, self.kappa4, self.eta_max, brackets))

    def as_dict(self) -> dict:
        out = {"algorithm": "first_order",
               "n": self.pc.n, "p": self.pc.p,
               "smoothness": self.pc.smoothness,
               "rho": self.pc.rho, "rho2": self.pc.rho2,
               "pl_constant": self.pc.pl_constant,
               "kappa2": self.kappa2, "alpha": self.alpha,
               "beta": self.beta, "eta": self.eta,
               "kappa1": self.kappa1, "kappa3": self.kappa3,
               "kappa4": self.kappa4, "eta_max": self.eta_max,
               "feasible": self.feasibility.ok,
               "violated": [c.name for c in self.feasibility.violated()]}
        for name in ("eps1", "eps2", "eps3", "eps4", "eps5", "eps6",
                     "eps7", "eps8", "eps9", "eps10", "eps"):
            out[name] = getattr(self, name)
        return out


def first_order_constants(pc: ProblemConstants, kappa2: float, alpha: float,
                          beta: float, eta: float) -> FirstOrderConstants:
    """Evaluate every first-order constant at explicit (alpha, beta, eta)."""
    return FirstOrderConstants(pc=pc, kappa2=kappa2, alpha=alpha,
                               beta=beta, eta=eta)


# ---------------------------------------------------------------------------
# zeroth-order constants


@dataclass(frozen=True)
class ZerothOrderConstants:
    """Windows and certificate constants for forward-difference agents.

    Shares eps3/eps4/eps8/eps9 with the first-order set; the `_t` variants
    absorb the worst-case estimator error, and eps11/eps12 price the
    per-iteration squared sampling radii in the descent ledger.
    """

    pc: ProblemConstants
    kappa2: float
    alpha: float
    beta: float
    eta: float
    eps_hat: float | None = None
    eps_breve: float | None = None
    kappa1_t: float = field(init=False, default=0.0)
    kappa3: float = field(init=False, default=0.0)
    kappa4_t: float = field(init=False, default=0.0)
    eps1_t: float = field(init=False, default=0.0)
    eps2_t: float = field(init=False, default=0.0)
    eps3: float = field(init=False, default=0.0)
    eps4: float = field(init=False, default=0.0)
    eps5_t: float = field(init=False, default=0.0)
    eps6_t: float = field(init=False, default=0.0)
    eps7_t: float = field(init=False, default=0.0)
    eps8: float = field(init=False, default=0.0)
    eps9: float = field(init=False, default=0.0)
    eps10_t: float | None = field(init=False, default=None)
    eps_t: float | None = field(init=False, default=None)
    eps11: float = field(init=False, default=0.0)
    eps12: float = field(init=False, default=0.0)
    eta_max: float = field(init=False, default=0.0)
    feasibility: Feasibility = field(init=False, default=None)

    def __post_init__(self):
        pc, a, b, eta = self.pc, self.alpha, self.beta, self.eta
        if a <= 0 or b <= 0 or eta <= 0:
            raise ValueError("alpha, beta, eta must be positive")
        L, r, r2 = pc.smoothness, pc.rho, pc.rho2
        k2 = self.kappa2
        s = object.__setattr__
        if self.eps_hat is not None:
            if not 0.0 < self.eps_hat < 1.0:
                raise ValueError(f"eps_hat must lie in (0,1), got {self.eps_hat}")
            if self.eps_breve is None:
                s(self, "eps_breve", 0.5 * (self.eps_hat + 1.0))
            elif not self.eps_hat < self.eps_breve < 1.0:
                raise ValueError(f"eps_breve must lie in (eps_hat, 1), "
                                 f"got {self.eps_breve}")
        s(self, "kappa1_t", (2.0 + 9.0 * L * L) / (2.0 * r2))
        s(self, "kappa3", 0.25 * (1.0 + math.sqrt(1.0 + 8.0 * k2 + 8.0 / r2)))
        t = k2 + 1.0 / r2
        s(self, "kappa4_t", 6.0 * t * L * L
          + 2.0 * math.sqrt(9.0 * t * t * L**4 + 3.0 * L * L))
        s(self, "eps1_t", (a - b) * r2 - 0.5 * (2.0 + 9.0 * L * L))
        s(self, "eps2_t", b * b * r + (2.0 * a * a + b * b) * r * r + 7.5 * L * L)
        s(self, "eps3", b - 0.5 - a / (2.0 * b * b) - 1.0 / (2.0 * b * r2))
        s(self, "eps4", 2.0 * b * b + 0.5)
        s(self, "eps5_t", 0.125 - (3.0 / (2.0 * b)) * (1.0 / b + 1.0 / r2 + a / b) * L * L)
        s(self, "eps6_t", (3.0 / (b * b)) * (1.0 + 1.0 / r2 + a / b) * L * L
          + L * (1.0 + 3.0 * L) / 2.0)
        s(self, "eps7_t", eta * min(self.eps1_t - eta * self.eps2_t, 0.125))
        s(self, "eps8", (a + b) / (2.0 * b) + 1.0 / (2.0 * r2))
        s(self, "eps9", min(1.0 / (2.0 * r), (a - b) / (2.0 * a)))
        quarter = 0.75 * pc.n * pc.p * L * L
        s(self, "eps12", ((1.0 / (b * b) + 1.0 / (2.0 * eta * b))
                          * (1.0 / r2 + a / b)
                          + 1.0 / (2.0 * eta * b * b) + 1.0 / (b * b) + 0.5)
          * quarter)
        s(self, "eps11", (15.0 * eta / 4.0 + 5.0 * eta * eta) * quarter + self.eps12)
        ratios = [self.eps1_t / self.eps2_t if self.eps2_t > 0 else math.inf,
                  self.eps3 / self.eps4 if self.eps4 > 0 else math.inf,
                  self.eps5_t / self.eps6_t if self.eps6_t > 0 else math.inf]
        s(self, "eta_max", min(ratios))
        brackets = [("eps1t_minus_eta_eps2t", self.eps1_t - eta * self.eps2_t),
                    ("eps3_minus_eta_eps4", self.eps3 - eta * self.eps4),
                    ("eps5t_minus_eta_eps6t", self.eps5_t - eta * self.eps6_t)]
        if pc.pl_constant is not None:
            nu = pc.pl_constant
            s(self, "eps10_t", eta * min(self.eps1_t - eta * self.eps2_t,
                                         self.eps3 - eta * self.eps4, nu / 4.0))
            s(self, "eps_t", self.eps10_t / self.eps8)
            brackets.append(("eps_t_in_unit_range",
                             min(self.eps_t, 0.125 - self.eps_t)))
        s(self, "feasibility", _window_conditions(
            "zeroth_order", pc, k2, a, b, eta,
            self.kappa1_t, self.kappa3, self.kappa4_t, self.eta_max, brackets))

    def as_dict(self) -> dict:
        out = {"algorithm": "zeroth_order",
               "n": self.pc.n, "p": self.pc.p,
               "smoothness": self.pc.smoothness,
               "rho": self.pc.rho, "rho2": self.pc.rho2,
               "pl_constant": self.pc.pl_constant,
               "kappa2": self.kappa2, "alpha": self.alpha,
               "beta": self.beta, "eta": self.eta,
               "kappa1_t": self.kappa1_t, "kappa3": self.kappa3,
               "kappa4_t": self.kappa4_t, "eta_max": self.eta_max,
               "eps_hat": self.eps_hat, "eps_breve": self.eps_breve,
               "feasible": self.feasibility.ok,
               "violated": [c.name for c in self.feasibility.violated()]}
        for name in ("eps1_t", "eps2_t", "eps3", "eps4", "eps5_t", "eps6_t",
                     "eps7_t", "eps8", "eps9", "eps10_t", "eps_t",
                     "eps11", "eps12"):
            out[name] = getattr(self, name)
        return out


def zeroth_order_constants(pc: ProblemConstants, kappa2: float, alpha: float,
                           beta: float, eta: float, eps_hat: float | None = None,
                           eps_breve: float | None = None) -> ZerothOrderConstants:
    """Evaluate every zeroth-order constant at explicit (alpha, beta, eta)."""
    return ZerothOrderConstants(pc=pc, kappa2=kappa2, alpha=alpha, beta=beta,
                                eta=eta, eps_hat=eps_hat, eps_breve=eps_breve)


# ---------------------------------------------------------------------------
# automatic parameter selection


def _select(pc, kappa2, beta_margin, alpha_frac, eta_safety, build):
    if kappa2 <= 1.0:
        raise ValueError(f"kappa2 must exceed 1, got {kappa2}")
    if beta_margin <= 0.0:
        raise ValueError("beta_margin must be strictly positive "
                         "(the beta window is open)")
    if not 0.0 < alpha_frac <= 1.0:
        raise ValueError(f"alpha_frac must lie in (0, 1], got {alpha_frac}")
    if eta_safety <= 0.0:
        raise ValueError(f"eta_safety must be positive, got {eta_safety}")
    eta_safety = min(eta_safety, 0.999)  # eta window is open at the top

    probe = build(pc, kappa2, 1.0, 1.0, 1.0)  # only for the kappa thresholds
    kappa1 = probe[0]
    kappa3 = probe[1]
    kappa4 = probe[2]
    beta = (1.0 + beta_margin) * max(kappa1 / (kappa2 - 1.0), kappa3, kappa4)
    lo = beta + kappa1
    hi = kappa2 * beta
    alpha = lo + alpha_frac * (hi - lo)
    eta_max = build(pc, kappa2, alpha, beta, 1.0)[3]
    if not math.isfinite(eta_max) or eta_max <= 0.0:
        raise ValueError("selection produced an empty stepsize window; "
                         "the brackets are not positive at these gains")
    return alpha, beta, eta_safety * eta_max


def select_first_order_params(pc: ProblemConstants, kappa2: float = 2.0,
                              beta_margin: float = 0.05, alpha_frac: float = 0.5,
                              eta_safety: float = 0.5) -> FirstOrderConstants:
    """Pick a feasible (alpha, beta, eta) for gradient agents.

    beta sits `beta_margin` (relative) above its open lower threshold, alpha
    at fraction `alpha_frac` through its window, eta at fraction `eta_safety`
    (capped at 0.999) of the open stepsize supremum.
    """

    def build(pc_, k2, a, b, e):
        c = FirstOrderConstants(pc=pc_, kappa2=k2, alpha=a, beta=b, eta=e)
        return c.kappa1, c.kappa3, c.kappa4, c.eta_max

    alpha, beta, eta = _select(pc, kappa2, beta_margin, alpha_frac,
                               eta_safety, build)
    return first_order_constants(pc, kappa2, alpha, beta, eta)


def select_zeroth_order_params(pc: ProblemConstants, kappa2: float = 2.0,
                               beta_margin: float = 0.05, alpha_frac: float = 0.5,
                               eta_safety: float = 0.5,
                               eps_hat: float | None = None,
                               eps_breve: float | None = None) -> ZerothOrderConstants:
    """Same selection recipe on the zeroth-order window set."""

    def build(pc_, k2, a, b, e):
        c = ZerothOrderConstants(pc=pc_, kappa2=k2, alpha=a, beta=b, eta=e)
        return c.kappa1_t, c.kappa3, c.kappa4_t, c.eta_max

    alpha, beta, eta = _select(pc, kappa2, beta_margin, alpha_frac,
                               eta_safety, build)
    return zeroth_order_constants(pc, kappa2, alpha, beta, eta,
                                  eps_hat=eps_hat, eps_breve=eps_breve)


# ---------------------------------------------------------------------------
# geometric machinery shared by the envelopes


def geometric_cross_sum_bound(a: float, b: float, k: int,
                              c: float | None = None) -> float:
    """Closed-form upper bound for sum_{t=0..k} a^t b^(k-t), 0 < a, b < 1.

    The unequal cases are tight geometric-tail bounds; the equal case needs
    an auxiliary ratio c in (a, 1) (midpoint of (a, 1) by default).
    """
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise ValueError(f"need 0 < a, b < 1, got a={a}, b={b}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if a > b:
        return a ** (k + 1) / (a - b)
    if a < b:
        return b ** (k + 1) / (b - a)
    if c is None:
        c = 0.5 * (a + 1.0)
    if not a < c < 1.0:
        raise ValueError(f"equal case needs c in (a, 1), got c={c}")
    return c ** (k + 1) / (c - b)


# ---------------------------------------------------------------------------
# convergence envelopes (first order)


def sum_penalty_envelope(fo: FirstOrderConstants, v0_hat: float) -> float:
    """Upper bound on the cumulative stationarity/consensus penalty sum,
    valid at every horizon."""
    if fo.eps7 <= 0:
        raise ValueError("eps7 must be positive (feasible eta) for this envelope")
    return fo.eps8 * v0_hat / fo.eps7


def gap_envelope(fo: FirstOrderConstants, v0_hat: float) -> float:
    """Upper bound on the optimality gap of the averaged iterate."""
    return fo.eps8 * v0_hat / fo.pc.n


def linear_envelope(fo: FirstOrderConstants, v0_hat: float, k: int) -> float:
    """Linear-rate envelope (1 - eps)^k * eps8 * v0_hat / eps9 under P-L."""
    if fo.eps is None:
        raise ValueError("linear envelope needs a P-L constant")
    if not 0.0 < fo.eps < 0.125:
        raise ValueError(f"contraction factor eps={fo.eps:g} outside (0, 1/8); "
                         "parameters are infeasible for the linear rate")
    return (1.0 - fo.eps) ** k * fo.eps8 * v0_hat / fo.eps9


def projected_linear_envelope(fo: FirstOrderConstants, v0_hat: float, k: int) -> float:
    """Linear-rate envelope for the squared distance to the minimizer set."""
    nu = fo.pc.pl_constant
    return linear_envelope(fo, v0_hat, k) * (1.0 + 1.0 / (2.0 * nu))


# ---------------------------------------------------------------------------
# convergence envelopes (zeroth order)


def zo_envelope_scale(zo: ZerothOrderConstants, u0_hat: float,
                      schedule: DeltaSchedule) -> float:
    """eps8 * u0_hat plus the priced total squared sampling radius."""
    total, diverges = delta_square_sum(schedule)
    if diverges:
        raise ValueError("the schedule's squared radii must be summable "
                         "for the zeroth-order envelopes")
    return zo.eps8 * u0_hat + (zo.eps11 + zo.eps12) * zo.pc.n * total


def zo_sum_envelope(zo: ZerothOrderConstants, u0_hat: float,
                    schedule: DeltaSchedule) -> float:
    if zo.eps7_t <= 0:
        raise ValueError("eps7_t must be positive (feasible eta) for this envelope")
    return zo_envelope_scale(zo, u0_hat, schedule) / zo.eps7_t


def zo_gap_envelope(zo: ZerothOrderConstants, u0_hat: float,
                    schedule: DeltaSchedule) -> float:
    return zo_envelope_scale(zo, u0_hat, schedule) / zo.pc.n


def _phi(zo: ZerothOrderConstants, k: int) -> float:
    """Accumulated sampling-error tail at iterate k+1 (piecewise geometric)."""
    if zo.eps_t is None or zo.eps_hat is None:
        raise ValueError("phi needs a P-L constant and a geometric eps_hat")
    coef = zo.eps11 / (1.0 - zo.eps_t) + zo.eps12
    decay = 1.0 - zo.eps_t
    if abs(decay - zo.eps_hat) <= 1e-15:
        return coef * zo.eps_breve ** (k + 1) / (zo.eps_breve - zo.eps_hat)
    if decay > zo.eps_hat:
        return coef * decay ** (k + 1) / (decay - zo.eps_hat)
    return coef * zo.eps_hat ** (k + 1) / (zo.eps_hat + zo.eps_t - 1.0)


def zo_linear_envelope(zo: ZerothOrderConstants, u0_hat: float, k: int) -> float:
    """Linear-rate envelope under P-L with geometrically decaying radii."""
    if zo.eps_t is None:
        raise ValueError("linear envelope needs a P-L constant")
    if not 0.0 < zo.eps_t < 0.125:
        raise ValueError(f"contraction factor eps_t={zo.eps_t:g} outside (0, 1/8); "
                         "parameters are infeasible for the linear rate")
    lead = (1.0 - zo.eps_t) ** (k + 1) * zo.eps8 * u0_hat
    return (lead + _phi(zo, k)) / zo.eps9


def zo_projected_linear_envelope(zo: ZerothOrderConstants, u0_hat: float,
                                 k: int) -> float:
    nu = zo.pc.pl_constant
    return zo_linear_envelope(zo, u0_hat, k) * (1.0 + 1.0 / (2.0 * nu))
