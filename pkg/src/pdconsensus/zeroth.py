"""Deterministic forward-difference gradient estimation and its accuracy.

The estimator samples the cost along each coordinate axis,

    est(x, delta) = (1/delta) * sum_l [f(x + delta e_l) - f(x)] e_l,

spending exactly p+1 function-value queries.  For an L-smooth cost the
estimation error is at most sqrt(p) * L * delta / 2, with equality for
isotropic quadratics (each coordinate contributes exactly delta/2).

Oracles exposing `value_diff` get the same arithmetic with the perturbation
difference computed analytically; the query count is unchanged (one base
point plus p perturbed points), only the float cancellation is avoided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "estimate_gradient",
    "estimator_error_bound",
    "DeltaSchedule",
    "delta_square_sum",
]


def estimate_gradient(oracle, x: np.ndarray, delta: float) -> np.ndarray:
    """Coordinate-wise forward-difference gradient estimate.

    Parameters
    ----------
    oracle : CostOracle
        Only `value` (and `value_diff` when present) is used.
    x : ndarray, shape (p,)
        Base point.
    delta : float
        Sampling radius, must be > 0.

    Returns
    -------
    ndarray, shape (p,)
    """
    if delta <= 0:
        raise ValueError(f"sampling radius must be positive, got {delta}")
    x = np.asarray(x, dtype=float)
    p = x.size
    out = np.empty(p)
    if oracle.value_diff is not None:
        for l in range(p):
            out[l] = oracle.value_diff(x, delta, l)
    else:
        base = oracle.value(x)
        for l in range(p):
            xp = x.copy()
            xp[l] += delta
            out[l] = oracle.value(xp) - base
    out /= delta
    return out


def estimator_error_bound(p: int, smoothness: float, delta: float) -> float:
    """Worst-case estimation error sqrt(p) * L * delta / 2."""
    return 0.5 * np.sqrt(p) * smoothness * delta


@dataclass(frozen=True)
class DeltaSchedule:
    """Per-iteration sampling radius delta_k, shared by all agents.

    Kinds
    -----
    square_summable : delta_k = delta0 / (k + 1)
        Square-summable but not summable-free; sum of squares is
        delta0^2 * pi^2 / 6.
    geometric : delta_k = delta0 * eps_hat^(k/2)
        Needs 0 < eps_hat < 1; with delta0 <= 1 it stays within the
        eps_hat^(k/2) envelope required for linear-rate guarantees.
    constant : delta_k = delta0
        Sum of squares diverges; only for exploratory runs.
    """

    kind: str
    delta0: float = 1e-2
    eps_hat: float | None = None

    def __post_init__(self):
        if self.kind not in ("square_summable", "geometric", "constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.delta0 <= 0:
            raise ValueError(f"delta0 must be positive, got {self.delta0}")
        if self.kind == "geometric":
            if self.eps_hat is None or not 0.0 < self.eps_hat < 1.0:
                raise ValueError(f"geometric schedule needs eps_hat in (0,1), "
                                 f"got {self.eps_hat}")
            if self.delta0 > 1.0:
                raise ValueError("geometric schedule needs delta0 <= 1 so that "
                                 "delta_k <= eps_hat^(k/2)")

    def delta_at(self, k: int) -> float:
        if k < 0:
            raise ValueError(f"iteration index must be >= 0, got {k}")
        if self.kind == "square_summable":
            return self.delta0 / (k + 1)
        if self.kind == "geometric":
            return self.delta0 * self.eps_hat ** (0.5 * k)
        return self.delta0


def delta_square_sum(schedule: DeltaSchedule, upto: int | None = None):
    """Sum of squared radii.

    Returns
    -------
    (total, diverges) : (float, bool)
        With `upto` given: the partial sum over k < upto (diverges False).
        With `upto` None: the closed-form infinite sum, or (inf, True) for
        the constant schedule.
    """
    if upto is not None:
        if upto < 0:
            raise ValueError(f"upto must be >= 0, got {upto}")
        ks = np.arange(upto)
        return float(np.sum([schedule.delta_at(int(k)) ** 2 for k in ks])), False
    if schedule.kind == "square_summable":
        return float(schedule.delta0**2 * np.pi**2 / 6.0), False
    if schedule.kind == "geometric":
        return float(schedule.delta0**2 / (1.0 - schedule.eps_hat)), False
    return float("inf"), True
