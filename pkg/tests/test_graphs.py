from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pdconsensus as pd
from conftest import random_connected_graph


def test_build_graph_rejects_bad_input():
    with pytest.raises(ValueError):
        pd.build_graph(1, [])
    with pytest.raises(ValueError):
        pd.build_graph(3, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        pd.build_graph(3, [(0, 1, -1.0)])
    with pytest.raises(ValueError):
        pd.build_graph(3, [(0, 3, 1.0)])


def test_laplacian_row_sums_zero():
    g = pd.ring_graph(5)
    lap = g.laplacian()
    assert np.allclose(lap.sum(axis=1), 0.0)
    assert np.allclose(lap, lap.T)


def test_path3_spectrum():
    # eigenvalues of the 3-path Laplacian are exactly {0, 1, 3}
    _, sd = pd.path_graph(3), pd.spectral_data(pd.path_graph(3))
    assert np.allclose(np.sort(sd.eigenvalues), [0.0, 1.0, 3.0], atol=1e-12)
    assert sd.rho2 == pytest.approx(1.0, abs=1e-12)
    assert sd.rho == pytest.approx(3.0, abs=1e-12)


def test_ring4_spectrum():
    # 4-cycle: {0, 2, 2, 4}
    sd = pd.spectral_data(pd.ring_graph(4))
    assert np.allclose(np.sort(sd.eigenvalues), [0.0, 2.0, 2.0, 4.0], atol=1e-12)


def test_complete_graph_spectrum():
    sd = pd.spectral_data(pd.complete_graph(6))
    assert sd.rho2 == pytest.approx(6.0, abs=1e-9)
    assert sd.rho == pytest.approx(6.0, abs=1e-9)


def test_spectral_data_rejects_disconnected():
    with pytest.raises(ValueError, match="not connected"):
        pd.build_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
    # a hand-built disconnected instance cannot sneak past the decomposition
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1.0
    w[2, 3] = w[3, 2] = 1.0
    g = pd.Graph(n=4, weights=w)
    assert not pd.is_connected(g)
    with pytest.raises(ValueError, match="connected"):
        pd.spectral_data(g)


def test_projector_and_pseudoinverse_identities():
    rng = np.random.default_rng(0)
    for _ in range(10):
        g = random_connected_graph(rng, int(rng.integers(2, 12)))
        sd = pd.spectral_data(g)
        lap, K, Q = sd.laplacian, sd.centering, sd.pseudoinverse
        assert np.max(np.abs(K @ lap - lap)) < 1e-10
        assert np.max(np.abs(lap @ K - lap)) < 1e-10
        assert np.max(np.abs(Q @ lap - K)) < 1e-10
        assert np.max(np.abs(lap @ Q - K)) < 1e-10
        assert np.max(np.abs(K @ K - K)) < 1e-10
        assert np.max(np.abs(Q @ np.ones(g.n))) < 1e-10


def test_quadratic_form_sandwiches():
    rng = np.random.default_rng(1)
    for _ in range(10):
        g = random_connected_graph(rng, int(rng.integers(2, 12)))
        sd = pd.spectral_data(g)
        xs = rng.standard_normal((20, g.n))
        for x in xs:
            k_form = x @ sd.centering @ x
            l_form = x @ sd.laplacian @ x
            q_form = x @ sd.pseudoinverse @ x
            assert sd.rho2 * k_form <= l_form * (1 + 1e-9) + 1e-12
            assert l_form <= sd.rho * k_form * (1 + 1e-9) + 1e-12
            assert k_form / sd.rho <= q_form * (1 + 1e-9) + 1e-12
            assert q_form <= k_form / sd.rho2 * (1 + 1e-9) + 1e-12


def test_random_geometric_graph_deterministic_and_connected():
    a = pd.random_geometric_graph(12, 0.5, seed=3)
    b = pd.random_geometric_graph(12, 0.5, seed=3)
    assert np.array_equal(a.weights, b.weights)
    assert pd.is_connected(a)
    c = pd.random_geometric_graph(12, 0.5, seed=4)
    assert not np.array_equal(a.weights, c.weights)


def test_random_geometric_graph_gives_up():
    with pytest.raises(RuntimeError):
        pd.random_geometric_graph(30, 0.01, seed=0, max_retries=3)


def test_edge_list_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    g = random_connected_graph(rng, 9)
    path = tmp_path / "graph.txt"
    pd.save_edge_list(g, path)
    back = pd.load_edge_list(path)
    assert back.n == g.n
    assert np.array_equal(back.weights, g.weights)


def test_ring_graph_rejects_degenerate_cycle():
    with pytest.raises(ValueError):
        pd.ring_graph(2)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(min_value=3, max_value=20),
       weight=st.floats(min_value=0.1, max_value=10.0))
def test_ring_laplacian_structure(n, weight):
    lap = pd.ring_graph(n, weight).laplacian()
    assert np.allclose(lap.sum(axis=1), 0.0, atol=1e-12)
    assert np.allclose(np.diag(lap), 2.0 * weight)
