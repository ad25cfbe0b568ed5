"""Benchmark cost families for multi-agent consensus optimization.

Each agent i owns a private smooth cost f_i : R^p -> R; the network target is
the average f(x) = (1/n) sum_i f_i(x).  An instance bundles one oracle per
agent plus whatever global structure is known analytically (minimum value,
Polyak-Lojasiewicz constant, projection onto the minimizer set).

Oracles optionally expose `value_diff(x, delta, l)` returning the exact
perturbation difference f(x + delta e_l) - f(x) in a cancellation-free form.
Subtracting two black-box evaluations loses all significant digits once
delta drops near sqrt(eps)*|f|, and collapses to exactly zero below
ulp(x)/2; the analytic difference keeps derivative estimators meaningful at
every delta > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "CostOracle",
    "ProblemInstance",
    "quadratic_problem",
    "sine_pl_problem",
    "rank_deficient_ls_problem",
    "ls_problem_from_data",
    "logistic_nonconvex_problem",
    "problem_from_spec",
    "save_problem",
    "load_problem",
    "finite_diff_gradient",
    "check_gradient",
]


@dataclass(eq=False)
class CostOracle:
    """Single agent's cost.

    Attributes
    ----------
    dim : int
        Ambient dimension p.
    value : callable
        x -> float.
    gradient : callable or None
        x -> ndarray (p,).  None for value-only (black-box) costs.
    smoothness : float
        Certified Lipschitz constant of the gradient.
    f_star : float or None
        Known minimum of the associated network-average cost, if any.
    pl_constant : float or None
        Known Polyak-Lojasiewicz constant of the network-average cost.
    value_diff : callable or None
        (x, delta, l) -> f(x + delta e_l) - f(x), cancellation-free.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray] | None
    smoothness: float
    f_star: float | None = None
    pl_constant: float | None = None
    value_diff: Callable[[np.ndarray, float, int], float] | None = None


@dataclass(eq=False)
class ProblemInstance:
    """One cost oracle per agent plus known global structure.

    `spec` is a flat kind-tagged parameter dict sufficient to rebuild the
    instance (see `problem_from_spec`), so runs are reproducible from
    serialized configuration alone.
    """

    name: str
    oracles: list
    dim: int
    f_star: float | None = None
    pl_constant: float | None = None
    project_optimum: Callable[[np.ndarray], np.ndarray] | None = None
    spec: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.oracles)

    @property
    def smoothness(self) -> float:
        """Shared gradient Lipschitz constant (max over agents)."""
        return max(o.smoothness for o in self.oracles)

    def global_value(self, x: np.ndarray) -> float:
        return float(np.mean([o.value(x) for o in self.oracles]))

    def global_gradient(self, x: np.ndarray) -> np.ndarray:
        if any(o.gradient is None for o in self.oracles):
            raise ValueError(f"{self.name}: not all agents expose a gradient")
        return np.mean([o.gradient(x) for o in self.oracles], axis=0)


# ---------------------------------------------------------------------------
# quadratic: f_i(x) = 0.5 ||x - c_i||^2


def quadratic_problem(n: int, p: int, seed: int) -> ProblemInstance:
    """Strongly convex quadratic with per-agent centers c_i ~ N(0, I).

    The network average is 0.5||x - cbar||^2 + const, so the minimizer is the
    mean center, f* = (1/2n) sum_i ||c_i - cbar||^2 above zero offset, and the
    P-L constant is exactly 1.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(n, p))
    cbar = centers.mean(axis=0)
    f_star = float(0.5 * np.sum((centers - cbar) ** 2) / n)

    def make(c):
        def value(x):
            return float(0.5 * np.sum((x - c) ** 2))

        def gradient(x):
            return np.asarray(x, dtype=float) - c

        def value_diff(x, delta, l):
            return delta * (x[l] - c[l]) + 0.5 * delta * delta

        return CostOracle(
            dim=p, value=value, gradient=gradient, smoothness=1.0,
            f_star=f_star, pl_constant=1.0, value_diff=value_diff,
        )

    return ProblemInstance(
        name="quadratic",
        oracles=[make(centers[i]) for i in range(n)],
        dim=p,
        f_star=f_star,
        pl_constant=1.0,
        project_optimum=lambda y: cbar.copy(),
        spec={"kind": "quadratic", "n": n, "p": p, "seed": seed},
    )


# ---------------------------------------------------------------------------
# scalar sine family: f_i(x) = x^2 + 3 sin^2(x) + b_i x, sum_i b_i = 0


def sine_pl_problem(n: int, shifts=None) -> ProblemInstance:
    """Nonconvex scalar costs whose average satisfies the P-L condition.

    The average is x^2 + 3 sin^2 x (the linear shifts cancel), which is
    nonconvex, has the single global minimizer x = 0 with f* = 0, satisfies
    the P-L inequality with constant 1/32, and has 8-Lipschitz gradient
    (|2 + 6 cos 2x| <= 8).  `shifts` makes the agents heterogeneous; it must
    sum to zero (tolerance 1e-12).  None means all zeros.
    """
    if shifts is None:
        shifts = np.zeros(n)
    shifts = np.asarray(shifts, dtype=float)
    if shifts.shape != (n,):
        raise ValueError(f"need {n} shifts, got shape {shifts.shape}")
    if abs(shifts.sum()) > 1e-12:
        raise ValueError(f"shifts must sum to zero, got {shifts.sum():g}")

    def make(b):
        def value(x):
            t = float(x[0])
            return t * t + 3.0 * np.sin(t) ** 2 + b * t

        def gradient(x):
            t = float(x[0])
            return np.array([2.0 * t + 3.0 * np.sin(2.0 * t) + b])

        def value_diff(x, delta, l):
            t = float(x[0])
            # sin^2(t+d) - sin^2(t) = sin(d) sin(2t+d)
            return (
                delta * (2.0 * t + delta)
                + 3.0 * np.sin(delta) * np.sin(2.0 * t + delta)
                + b * delta
            )

        return CostOracle(
            dim=1, value=value, gradient=gradient, smoothness=8.0,
            f_star=0.0, pl_constant=1.0 / 32.0, value_diff=value_diff,
        )

    return ProblemInstance(
        name="sine_pl",
        oracles=[make(float(b)) for b in shifts],
        dim=1,
        f_star=0.0,
        pl_constant=1.0 / 32.0,
        project_optimum=lambda y: np.zeros(1),
        spec={"kind": "sine_pl", "n": n,
              "shifts": [float(b) for b in shifts]},
    )


# ---------------------------------------------------------------------------
# rank-deficient least squares: f_i(x) = ||A_i x - b_i||^2


def ls_problem_from_data(mats, rhs, validate_pl: bool = True) -> ProblemInstance:
    """Least-squares instance from explicit per-agent (A_i, b_i).

    The average cost (1/n)||Ax - b||^2 (stacked A, b) satisfies the P-L
    condition with constant 2 lambda_min+(A^T A)/n, where lambda_min+ is the
    smallest nonzero eigenvalue; the minimizer set is the affine set of
    least-squares solutions and the projection onto it is computed from the
    SVD of the stacked matrix.
    """
    mats = [np.asarray(a, dtype=float) for a in mats]
    rhs = [np.asarray(b, dtype=float).ravel() for b in rhs]
    n = len(mats)
    p = mats[0].shape[1]
    if any(a.shape[1] != p for a in mats):
        raise ValueError("agents disagree on the variable dimension")
    if any(a.shape[0] != b.shape[0] for a, b in zip(mats, rhs)):
        raise ValueError("A_i and b_i row counts disagree")

    a_stack = np.vstack(mats)
    b_stack = np.concatenate(rhs)
    x_hat, *_ = np.linalg.lstsq(a_stack, b_stack, rcond=None)
    f_star = float(np.sum((a_stack @ x_hat - b_stack) ** 2) / n)

    gram = a_stack.T @ a_stack
    evals = np.linalg.eigvalsh(gram)
    tol = 1e-10 * max(1.0, evals[-1])
    pos = evals[evals > tol]
    if pos.size == 0:
        raise ValueError("stacked matrix is zero; no nontrivial cost")
    nu = float(2.0 * pos[0] / n)

    # orthonormal null-space basis of the stacked matrix, for the projection
    _, svals, vt = np.linalg.svd(a_stack)
    rank = int(np.sum(svals > 1e-10 * max(1.0, svals[0] if svals.size else 0.0)))
    null_basis = vt[rank:].T  # (p, p - rank)

    def project(y):
        z = np.asarray(y, dtype=float) - x_hat
        return x_hat + null_basis @ (null_basis.T @ z)

    def make(a, b):
        smooth = float(2.0 * np.linalg.eigvalsh(a.T @ a)[-1])

        def value(x):
            r = a @ x - b
            return float(r @ r)

        def gradient(x):
            return 2.0 * (a.T @ (a @ x - b))

        def value_diff(x, delta, l):
            r = a @ x - b
            col = a[:, l]
            return 2.0 * delta * float(col @ r) + delta * delta * float(col @ col)

        return CostOracle(
            dim=p, value=value, gradient=gradient, smoothness=smooth,
            f_star=f_star, pl_constant=nu, value_diff=value_diff,
        )

    inst = ProblemInstance(
        name="rank_deficient_ls",
        oracles=[make(a, b) for a, b in zip(mats, rhs)],
        dim=p,
        f_star=f_star,
        pl_constant=nu,
        project_optimum=project,
        spec={"kind": "ls_explicit"},
    )
    if validate_pl:
        _validate_pl_constant(inst, seed=0)
    return inst


def rank_deficient_ls_problem(
    n: int, p: int, rank: int, seed: int,
    rows_per_agent: int = 2, noise: float = 0.1, max_retries: int = 50,
) -> ProblemInstance:
    """Random least squares whose stacked matrix has the prescribed rank < p.

    A is drawn as a product of Gaussian factors (rank `rank` almost surely),
    scaled to keep the per-agent smoothness O(1); b adds Gaussian noise to a
    consistent right-hand side so f* > 0 unless noise = 0.  Ill-conditioned
    draws (positive spectrum spread beyond 1e8) are resampled.
    """
    if not 1 <= rank < p:
        raise ValueError(f"need 1 <= rank < p, got rank={rank}, p={p}")
    rng = np.random.default_rng(seed)
    rows = n * rows_per_agent
    for _ in range(max_retries):
        left = rng.normal(size=(rows, rank))
        right = rng.normal(size=(rank, p))
        a_stack = (left @ right) / np.sqrt(rows)
        w_ref = rng.normal(size=p)
        b_stack = a_stack @ w_ref + noise * rng.normal(size=rows)
        evals = np.linalg.eigvalsh(a_stack.T @ a_stack)
        pos = evals[evals > 1e-10 * max(1.0, evals[-1])]
        if pos.size != rank or pos[0] / pos[-1] < 1e-8:
            continue
        mats = [a_stack[i * rows_per_agent:(i + 1) * rows_per_agent] for i in range(n)]
        rhs = [b_stack[i * rows_per_agent:(i + 1) * rows_per_agent] for i in range(n)]
        inst = ls_problem_from_data(mats, rhs)
        inst.spec = {"kind": "rank_deficient_ls", "n": n, "p": p, "rank": rank,
                     "seed": seed, "rows_per_agent": rows_per_agent,
                     "noise": noise}
        return inst
    raise RuntimeError(f"no well-conditioned rank-{rank} draw in {max_retries} tries")


def _validate_pl_constant(inst: ProblemInstance, seed: int, samples: int = 64):
    """Sample-check 0.5||grad f(x)||^2 >= nu (f(x) - f*) before shipping nu."""
    rng = np.random.default_rng(seed)
    nu, f_star = inst.pl_constant, inst.f_star
    for scale in (0.1, 1.0, 10.0):
        for _ in range(samples // 4):
            x = scale * rng.normal(size=inst.dim)
            gap = inst.global_value(x) - f_star
            half_sq = 0.5 * float(np.sum(inst.global_gradient(x) ** 2))
            if half_sq < nu * gap * (1.0 - 1e-9) - 1e-12:
                raise ValueError(
                    f"{inst.name}: P-L constant {nu:g} fails at a sampled point "
                    f"(0.5||g||^2 = {half_sq:g} < nu*gap = {nu * gap:g})"
                )


# ---------------------------------------------------------------------------
# regularized logistic regression with a nonconvex smooth penalty


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t, dtype=float)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def logistic_nonconvex_problem(
    n: int, m: int, p: int, lam: float, mu: float, seed: int
) -> ProblemInstance:
    """Binary logistic loss plus a smooth bounded nonconvex regularizer.

    Agent i holds m feature rows z ~ N(0, I_p) with labels y = sign(w*.z)
    flipped with probability 0.1 (w* ~ N(0, I_p) shared).  Cost per agent:

        (1/m) sum_s log(1 + exp(-y_s x.z_s)) + sum_l lam*mu*x_l^2/(1 + mu*x_l^2)

    The smoothness certificate is max_i lambda_max(Z_i^T Z_i)/(4m) + 2*lam*mu
    (logistic curvature is at most 1/4 per sample; the regularizer's second
    derivative peaks at 2*lam*mu).  No global minimum is known analytically.
    """
    rng = np.random.default_rng(seed)
    w_true = rng.normal(size=p)
    oracles = []
    smooth_max = 0.0
    for _ in range(n):
        z = rng.normal(size=(m, p))
        y = np.sign(z @ w_true)
        y[y == 0] = 1.0
        flip = rng.random(m) < 0.1
        y[flip] = -y[flip]
        top = float(np.linalg.svd(z, compute_uv=False)[0] ** 2)
        smooth = top / (4.0 * m) + 2.0 * lam * mu
        smooth_max = max(smooth_max, smooth)
        oracles.append(_logistic_oracle(z, y, lam, mu, smooth))
    for o in oracles:
        o.smoothness = smooth_max  # shared certificate across agents
    return ProblemInstance(
        name="logistic_nonconvex",
        oracles=oracles,
        dim=p,
        f_star=None,
        pl_constant=None,
        project_optimum=None,
        spec={"kind": "logistic_nonconvex", "n": n, "m": m, "p": p,
              "lam": lam, "mu": mu, "seed": seed},
    )


def _logistic_oracle(z, y, lam, mu, smooth) -> CostOracle:
    m, p = z.shape

    def margins(x):
        return -y * (z @ x)

    def value(x):
        x = np.asarray(x, dtype=float)
        loss = float(np.mean(np.logaddexp(0.0, margins(x))))
        reg = float(np.sum(lam * mu * x**2 / (1.0 + mu * x**2)))
        return loss + reg

    def gradient(x):
        x = np.asarray(x, dtype=float)
        s = _sigmoid(margins(x))
        loss_g = -(z.T @ (y * s)) / m
        reg_g = 2.0 * lam * mu * x / (1.0 + mu * x**2) ** 2
        return loss_g + reg_g

    def value_diff(x, delta, l):
        x = np.asarray(x, dtype=float)
        a = margins(x)
        c = -y * delta * z[:, l]
        # log(1+e^{a+c}) - log(1+e^a) = log1p(sigmoid(a) * expm1(c))
        loss_d = float(np.mean(np.log1p(_sigmoid(a) * np.expm1(c))))
        t = x[l]
        reg_d = (lam * mu * delta * (2.0 * t + delta)
                 / ((1.0 + mu * (t + delta) ** 2) * (1.0 + mu * t * t)))
        return loss_d + reg_d

    return CostOracle(dim=p, value=value, gradient=gradient,
                      smoothness=smooth, value_diff=value_diff)


# ---------------------------------------------------------------------------
# serialization: flat "key = value" text, kind tag first


def problem_from_spec(spec: dict) -> ProblemInstance:
    """Rebuild an instance from its kind-tagged parameter dict."""
    kind = spec.get("kind")
    if kind == "quadratic":
        return quadratic_problem(int(spec["n"]), int(spec["p"]), int(spec["seed"]))
    if kind == "sine_pl":
        shifts = spec.get("shifts")
        return sine_pl_problem(int(spec["n"]), shifts)
    if kind == "rank_deficient_ls":
        return rank_deficient_ls_problem(
            int(spec["n"]), int(spec["p"]), int(spec["rank"]), int(spec["seed"]),
            rows_per_agent=int(spec.get("rows_per_agent", 2)),
            noise=float(spec.get("noise", 0.1)),
        )
    if kind == "logistic_nonconvex":
        return logistic_nonconvex_problem(
            int(spec["n"]), int(spec["m"]), int(spec["p"]),
            float(spec["lam"]), float(spec["mu"]), int(spec["seed"]),
        )
    raise ValueError(f"unknown problem kind {kind!r}")


def save_problem(inst: ProblemInstance, path) -> None:
    if not inst.spec or "kind" not in inst.spec:
        raise ValueError(f"{inst.name}: instance carries no rebuildable spec")
    lines = []
    for key, val in inst.spec.items():
        if isinstance(val, (list, tuple, np.ndarray)):
            val = ",".join(repr(float(v)) for v in val)
        lines.append(f"{key} = {val}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_problem(path) -> ProblemInstance:
    spec = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, val = line.partition("=")
            spec[key.strip()] = val.strip()
    if "shifts" in spec:
        spec["shifts"] = [float(v) for v in spec["shifts"].split(",")]
    return problem_from_spec(spec)


# ---------------------------------------------------------------------------
# derivative checking


def finite_diff_gradient(fun, x, step: float) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for l in range(x.size):
        e = np.zeros_like(x)
        e[l] = step
        g[l] = (fun(x + e) - fun(x - e)) / (2.0 * step)
    return g


def check_gradient(oracle: CostOracle, points, rel_tol: float = 1e-6) -> float:
    """Max relative disagreement between analytic and central-difference
    gradients over the given points; raises if it exceeds `rel_tol`."""
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        h = 1e-6 * (1.0 + float(np.linalg.norm(x)))
        fd = finite_diff_gradient(oracle.value, x, h)
        an = oracle.gradient(x)
        err = float(np.linalg.norm(fd - an) / (1.0 + np.linalg.norm(an)))
        worst = max(worst, err)
    if worst > rel_tol:
        raise AssertionError(f"gradient check failed: rel err {worst:g} > {rel_tol:g}")
    return worst
