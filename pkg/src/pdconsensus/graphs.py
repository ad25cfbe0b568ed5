"""Weighted undirected communication graphs and their spectral data.

Agents sit on the nodes of a connected weighted undirected graph; the
consensus dynamics act through the graph Laplacian L = Deg - A.  Everything
downstream (stepsize windows, Lyapunov weights, envelope constants) is a
function of the Laplacian spectrum, so the spectral decomposition is computed
once and carried around as a frozen bundle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "SpectralData",
    "build_graph",
    "ring_graph",
    "path_graph",
    "complete_graph",
    "random_geometric_graph",
    "is_connected",
    "spectral_data",
    "save_edge_list",
    "load_edge_list",
]


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on n nodes.

    Attributes
    ----------
    n : int
        Number of nodes.
    weights : ndarray, shape (n, n)
        Symmetric nonnegative weight matrix with zero diagonal.  The array is
        marked read-only after construction.
    """

    n: int
    weights: np.ndarray

    def __post_init__(self):
        self.weights.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, k=1)))

    def laplacian(self) -> np.ndarray:
        deg = np.diag(self.weights.sum(axis=1))
        return deg - self.weights


def build_graph(n: int, edges) -> Graph:
    """Assemble a graph from an edge list.

    Parameters
    ----------
    n : int
        Number of nodes (>= 2).
    edges : iterable of (i, j, w)
        Undirected weighted edges, zero-based node indices, w > 0.

    Raises
    ------
    ValueError
        On bad node count, self loops, nonpositive weights, duplicate edges
        (an edge listed in both orientations counts as a duplicate), or a
        disconnected result.
    """
    if n < 2:
        raise ValueError(f"graph needs at least 2 nodes, got n={n}")
    w = np.zeros((n, n))
    for i, j, wt in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self loop at node {i}")
        if wt <= 0:
            raise ValueError(f"edge ({i},{j}) has nonpositive weight {wt}")
        if w[i, j] != 0:
            raise ValueError(f"duplicate edge ({i},{j})")
        w[i, j] = w[j, i] = wt
    g = Graph(n=n, weights=w)
    if not is_connected(g):
        raise ValueError("graph is not connected")
    return g


def ring_graph(n: int, weight: float = 1.0) -> Graph:
    """Cycle on n >= 3 nodes with uniform edge weight."""
    if n < 3:
        raise ValueError(f"a cycle needs at least 3 nodes, got n={n}")
    return build_graph(n, [(i, (i + 1) % n, weight) for i in range(n)])


def path_graph(n: int, weight: float = 1.0) -> Graph:
    """Path on n nodes with uniform edge weight."""
    return build_graph(n, [(i, i + 1, weight) for i in range(n - 1)])


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    """Complete graph on n nodes with uniform edge weight."""
    return build_graph(
        n, [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
    )


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability over the positive-weight edges."""
    seen = np.zeros(g.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.nonzero(g.weights[i] > 0)[0]:
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def random_geometric_graph(
    n: int, radius: float, seed: int, max_retries: int = 1000
) -> Graph:
    """Random geometric graph on the unit square, resampled until connected.

    Nodes are placed uniformly at random in [0, 1]^2 and joined by a
    unit-weight edge whenever their Euclidean distance is at most `radius`.
    Draws are resampled (same RNG stream, so the result is deterministic per
    seed) until the graph is connected.

    Raises
    ------
    RuntimeError
        If no connected draw shows up within `max_retries` attempts.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        pts = rng.random((n, 2))
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        w = ((d <= radius) & ~np.eye(n, dtype=bool)).astype(float)
        g = Graph(n=n, weights=w)
        if is_connected(g):
            return g
    raise RuntimeError(
        f"no connected geometric graph in {max_retries} draws "
        f"(n={n}, radius={radius}, seed={seed})"
    )


@dataclass(frozen=True)
class SpectralData:
    """Spectral bundle of a connected graph Laplacian.

    Attributes
    ----------
    laplacian : ndarray, shape (n, n)
        L = Deg - A.
    eigenvalues : ndarray, shape (n,)
        Ascending; the first is ~0 for a connected graph.
    rho : float
        Largest Laplacian eigenvalue.
    rho2 : float
        Smallest nonzero (algebraic connectivity) eigenvalue.
    centering : ndarray, shape (n, n)
        Projector I - (1/n) 1 1^T onto the disagreement subspace.
    pseudoinverse : ndarray, shape (n, n)
        Moore-Penrose pseudoinverse of L (spectral form on the nonzero part).
    """

    n: int
    laplacian: np.ndarray
    eigenvalues: np.ndarray
    rho: float
    rho2: float
    centering: np.ndarray
    pseudoinverse: np.ndarray

    def __post_init__(self):
        for a in (self.laplacian, self.eigenvalues, self.centering,
                  self.pseudoinverse):
            a.setflags(write=False)


def spectral_data(g: Graph, zero_tol: float = 1e-9) -> SpectralData:
    """Eigen-decompose the Laplacian of a connected graph.

    Eigenvalues below `zero_tol * max(1, rho)` are treated as the single
    zero mode of a connected graph; more than one such eigenvalue means the
    graph is disconnected and raises ValueError (double-checked against the
    combinatorial connectivity test).
    """
    lap = g.laplacian()
    vals, vecs = np.linalg.eigh(lap)
    tol = zero_tol * max(1.0, float(vals[-1]))
    n_zero = int(np.sum(vals < tol))
    if n_zero != 1 or not is_connected(g):
        raise ValueError(
            f"spectral_data needs a connected graph "
            f"(found {n_zero} near-zero eigenvalues at tol {tol:g})"
        )
    nz = vals >= tol
    pinv = (vecs[:, nz] / vals[nz]) @ vecs[:, nz].T
    n = g.n
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    return SpectralData(
        n=n,
        laplacian=lap,
        eigenvalues=vals,
        rho=float(vals[-1]),
        rho2=float(vals[np.argmax(nz)]),
        centering=centering,
        pseudoinverse=pinv,
    )


def save_edge_list(g: Graph, path) -> None:
    """Write the plain-text edge list: header "n <edge count>", then one
    "i j weight" line per undirected edge, zero-based indices."""
    lines = [f"{g.n} {g.edge_count}"]
    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.weights[i, j] > 0:
                lines.append(f"{i} {j} {float(g.weights[i, j])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_edge_list(path) -> Graph:
    """Read a graph saved by `save_edge_list` (validates via build_graph)."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not raw:
        raise ValueError(f"{path}: empty edge-list file")
    head = raw[0].split()
    if len(head) != 2:
        raise ValueError(f"{path}: header must be 'n <edge count>', got {raw[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(raw) - 1 != m:
        raise ValueError(f"{path}: header promises {m} edges, file has {len(raw) - 1}")
    edges = []
    for ln in raw[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"{path}: bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return build_graph(n, edges)
