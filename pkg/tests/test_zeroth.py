from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pdconsensus as pd


def black_box(fun, dim, smoothness):
    return pd.CostOracle(dim=dim, value=fun, gradient=None,
                         smoothness=smoothness)


def test_estimator_exact_on_linear_functions():
    oracle = black_box(lambda x: 2.0 * x[0] - 3.0 * x[1] + 1.0, 2, 1.0)
    est = pd.estimate_gradient(oracle, np.array([0.3, -0.8]), 0.05)
    assert np.allclose(est, [2.0, -3.0], atol=1e-12)


def test_estimator_hand_value():
    # f(x) = x^2 at 0 with delta: estimate is ((0+d)^2 - 0)/d = d
    oracle = black_box(lambda x: float(x[0] ** 2), 1, 2.0)
    assert pd.estimate_gradient(oracle, np.zeros(1), 0.05)[0] == pytest.approx(0.05)


def test_estimator_rejects_nonpositive_delta():
    oracle = black_box(lambda x: 0.0, 1, 1.0)
    with pytest.raises(ValueError):
        pd.estimate_gradient(oracle, np.zeros(1), 0.0)
    with pytest.raises(ValueError):
        pd.estimate_gradient(oracle, np.zeros(1), -1e-3)


def test_estimator_uses_p_plus_1_queries():
    calls = []

    def fun(x):
        calls.append(np.array(x))
        return float(np.sum(x**2))

    oracle = black_box(fun, 4, 2.0)
    pd.estimate_gradient(oracle, np.zeros(4), 1e-3)
    assert len(calls) == 5
    # one base point, then p singly-perturbed points
    assert sum(1 for c in calls if np.all(c == 0)) == 1


def test_isotropic_quadratic_error_is_exactly_the_bound():
    # each coordinate of the estimate overshoots the gradient by delta/2
    prob = pd.quadratic_problem(3, 4, seed=0)
    rng = np.random.default_rng(1)
    for oracle in prob.oracles:
        x = rng.standard_normal(4)
        for delta in (1e-1, 1e-3, 1e-6):
            est = pd.estimate_gradient(oracle, x, delta)
            err = est - oracle.gradient(x)
            assert np.allclose(err, 0.5 * delta, rtol=1e-9, atol=1e-15)
            bound = pd.estimator_error_bound(4, oracle.smoothness, delta)
            assert np.linalg.norm(err) == pytest.approx(bound, rel=1e-9)


def test_estimator_error_bound_over_benchmark_oracles():
    problems = [
        pd.quadratic_problem(2, 3, seed=2),
        pd.sine_pl_problem(3, [0.5, -0.5, 0.0]),
        pd.rank_deficient_ls_problem(3, 4, 2, seed=3),
        pd.logistic_nonconvex_problem(2, 12, 3, lam=0.01, mu=1.0, seed=4),
    ]
    rng = np.random.default_rng(5)
    for prob in problems:
        for oracle in prob.oracles:
            for _ in range(5):
                x = 2.0 * rng.standard_normal(oracle.dim)
                delta = float(10.0 ** rng.uniform(-6, -1))
                est = pd.estimate_gradient(oracle, x, delta)
                err = np.linalg.norm(est - oracle.gradient(x))
                assert err <= pd.estimator_error_bound(
                    oracle.dim, oracle.smoothness, delta) + 1e-12


@settings(max_examples=50, deadline=None)
@given(t=st.floats(min_value=-5, max_value=5),
       delta=st.floats(min_value=1e-8, max_value=0.5))
def test_sine_estimator_error_within_bound(t, delta):
    oracle = pd.sine_pl_problem(1).oracles[0]
    x = np.array([t])
    err = abs(pd.estimate_gradient(oracle, x, delta)[0] - oracle.gradient(x)[0])
    assert err <= pd.estimator_error_bound(1, oracle.smoothness, delta) + 1e-12


def test_schedule_values():
    sq = pd.DeltaSchedule(kind="square_summable", delta0=0.4)
    assert sq.delta_at(0) == pytest.approx(0.4)
    assert sq.delta_at(3) == pytest.approx(0.1)
    geo = pd.DeltaSchedule(kind="geometric", delta0=1e-2, eps_hat=0.81)
    assert geo.delta_at(0) == pytest.approx(1e-2)
    assert geo.delta_at(2) == pytest.approx(1e-2 * 0.81)
    assert geo.delta_at(1) == pytest.approx(1e-2 * 0.9)
    const = pd.DeltaSchedule(kind="constant", delta0=1e-4)
    assert const.delta_at(123) == 1e-4


def test_schedule_validation():
    with pytest.raises(ValueError):
        pd.DeltaSchedule(kind="linear", delta0=0.1)
    with pytest.raises(ValueError):
        pd.DeltaSchedule(kind="constant", delta0=0.0)
    with pytest.raises(ValueError):
        pd.DeltaSchedule(kind="geometric", delta0=0.1)
    with pytest.raises(ValueError):
        pd.DeltaSchedule(kind="geometric", delta0=0.1, eps_hat=1.0)
    with pytest.raises(ValueError):
        pd.DeltaSchedule(kind="geometric", delta0=2.0, eps_hat=0.9)
    with pytest.raises(ValueError):
        pd.DeltaSchedule(kind="constant", delta0=0.1).delta_at(-1)


def test_delta_square_sums():
    sq = pd.DeltaSchedule(kind="square_summable", delta0=1.0)
    total, diverges = pd.delta_square_sum(sq)
    assert not diverges
    assert total == pytest.approx(np.pi**2 / 6.0)
    partial, _ = pd.delta_square_sum(sq, upto=100000)
    assert partial < total <= partial + 1e-4

    geo = pd.DeltaSchedule(kind="geometric", delta0=0.5, eps_hat=0.9)
    total, diverges = pd.delta_square_sum(geo)
    assert not diverges
    assert total == pytest.approx(0.25 / 0.1)
    partial, _ = pd.delta_square_sum(geo, upto=500)
    assert partial == pytest.approx(total, rel=1e-9)

    const = pd.DeltaSchedule(kind="constant", delta0=1e-3)
    total, diverges = pd.delta_square_sum(const)
    assert diverges and total == float("inf")
    partial, diverges = pd.delta_square_sum(const, upto=10)
    assert not diverges
    assert partial == pytest.approx(10 * 1e-6)


def test_naive_difference_collapses_but_value_diff_does_not():
    # black-box two-evaluation estimates go to exact zero once delta drops
    # below the rounding floor of x; the analytic perturbation difference
    # keeps tracking the gradient
    sine = pd.sine_pl_problem(1).oracles[0]
    naked = black_box(sine.value, 1, sine.smoothness)
    x = np.array([0.7])
    delta = 1e-18
    assert pd.estimate_gradient(naked, x, delta)[0] == 0.0
    assert pd.estimate_gradient(sine, x, delta)[0] == pytest.approx(
        sine.gradient(x)[0], rel=1e-9)
