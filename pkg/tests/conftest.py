from __future__ import annotations

import numpy as np
import pytest

import pdconsensus as pd


@pytest.fixture(scope="session")
def ring4():
    graph = pd.ring_graph(4)
    return graph, pd.spectral_data(graph)


@pytest.fixture(scope="session")
def path2():
    graph = pd.path_graph(2)
    return graph, pd.spectral_data(graph)


@pytest.fixture(scope="session")
def path3():
    graph = pd.path_graph(3)
    return graph, pd.spectral_data(graph)


@pytest.fixture(scope="session")
def quad_ring4(ring4):
    _, sd = ring4
    problem = pd.quadratic_problem(4, 3, seed=23)
    return problem, sd


@pytest.fixture(scope="session")
def sine_ring4(ring4):
    _, sd = ring4
    problem = pd.sine_pl_problem(4, [1.5, -0.5, -1.0, 0.0])
    return problem, sd


@pytest.fixture(scope="session")
def ls_rgg5():
    graph = pd.random_geometric_graph(5, 0.7, seed=5)
    problem = pd.rank_deficient_ls_problem(5, 4, 2, seed=31)
    return problem, pd.spectral_data(graph)


def zero_problem(n: int, p: int) -> pd.ProblemInstance:
    """All-zero costs: isolates the consensus dynamics."""
    oracle = pd.CostOracle(
        dim=p,
        value=lambda x: 0.0,
        gradient=lambda x: np.zeros(p),
        smoothness=1.0,
        f_star=0.0,
    )
    return pd.ProblemInstance(
        name="zero", oracles=[oracle] * n, dim=p, f_star=0.0, pl_constant=None
    )


def random_connected_graph(rng: np.random.Generator, n: int) -> pd.Graph:
    """Random spanning tree plus extra random edges, unit weights."""
    edges = set()
    order = rng.permutation(n)
    for i in range(1, n):
        a = int(order[rng.integers(0, i)])
        b = int(order[i])
        edges.add((min(a, b), max(a, b)))
    extra = rng.integers(0, n + 1)
    for _ in range(int(extra)):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges.add((min(int(a), int(b)), max(int(a), int(b))))
    return pd.build_graph(
        n, [(a, b, float(rng.uniform(0.5, 2.0))) for a, b in edges]
    )
