"""Simple undirected graphs with a fixed edge ordering.

Everything downstream indexes cost matrices and lifted variables by edge
position, so the edge order is part of the graph identity.  Vertices are
0-based internally; the instance file format is 1-based and converts at the
boundary.

Also hosts the spectral side of the spanning tree characterization: a
weighted subgraph X with n-1 edges is a spanning tree exactly when

    Diag(X 1) - X + alpha*J - beta*I  is positive semidefinite,

with beta = 2*(1 - cos(pi/n)) the algebraic connectivity of the path on n
vertices and alpha = beta/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative PSD tolerance: M counts as PSD when lambda_min(M) >= -PSD_RTOL * max(1, ||M||_F).
PSD_RTOL = 1e-8


@dataclass(frozen=True)
class SpectralConstants:
    """Shift pair (alpha, beta) of the tree LMI for a given vertex count."""

    beta: float
    alpha: float


def spectral_constants(n: int) -> SpectralConstants:
    """Return (beta, alpha) for n vertices; beta = 2(1-cos(pi/n)), alpha = beta/n."""
    if n < 3:
        raise ValueError(f"need n >= 3, got n={n}")
    beta = 2.0 * (1.0 - math.cos(math.pi / n))
    return SpectralConstants(beta=beta, alpha=beta / n)


class Graph:
    """Connected simple graph on vertices 0..n-1 with an explicit edge order.

    The constructor preserves the given edge order; use `from_edge_set` to get
    the canonical order (sorted by (min endpoint, max endpoint)).
    """

    def __init__(self, n: int, edges, require_connected: bool = True):
        if n < 2:
            raise ValueError(f"need n >= 2, got n={n}")
        norm_edges = []
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"loop edge ({u},{v})")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            norm_edges.append((u, v))
        self.n = n
        self.edges = tuple(norm_edges)
        self.adjacency = np.zeros((n, n))
        for u, v in self.edges:
            self.adjacency[u, v] = 1.0
            self.adjacency[v, u] = 1.0
        self.edge_index = {e: k for k, e in enumerate(self.edges)}
        delta = [[] for _ in range(n)]
        for k, (u, v) in enumerate(self.edges):
            delta[u].append(k)
            delta[v].append(k)
        self._delta = tuple(np.array(d, dtype=np.intp) for d in delta)
        self._degree = np.array([len(d) for d in delta], dtype=np.intp)
        if require_connected and not self._connected():
            raise ValueError("graph is not connected")

    @classmethod
    def from_edge_set(cls, n: int, edges, require_connected: bool = True) -> "Graph":
        """Build with edges in the canonical lexicographic order."""
        canon = sorted((min(u, v), max(u, v)) for u, v in edges)
        return cls(n, canon, require_connected=require_connected)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, [(u, v) for u in range(n) for v in range(u + 1, n)])

    @property
    def m(self) -> int:
        return len(self.edges)

    def endpoints(self, k: int) -> tuple[int, int]:
        return self.edges[k]

    def delta(self, i: int) -> np.ndarray:
        """Indices of edges incident to vertex i."""
        if not 0 <= i < self.n:
            raise ValueError(f"vertex {i} out of range")
        return self._delta[i]

    def degree(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise ValueError(f"vertex {i} out of range")
        return int(self._degree[i])

    def _connected(self) -> bool:
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for k in self._delta[u]:
                a, b = self.edges[k]
                w = b if a == u else a
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def laplacian(X: np.ndarray) -> np.ndarray:
    """Weighted Laplacian Diag(X 1) - X of a symmetric zero-diagonal matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    if not np.allclose(X, X.T, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    return np.diag(X.sum(axis=1)) - X


def min_eigenvalue(M: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetrized matrix."""
    M = np.asarray(M, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def is_psd(M: np.ndarray, rtol: float = PSD_RTOL) -> bool:
    M = np.asarray(M, dtype=float)
    return min_eigenvalue(M) >= -rtol * max(1.0, float(np.linalg.norm(M)))


def is_tree_lmi(X: np.ndarray, rtol: float = PSD_RTOL) -> bool:
    """Spectral spanning tree test for a 0/1 symmetric matrix with n-1 edges.

    Checks Diag(X 1) - X + alpha*J - beta*I >= 0.  The matrix is singular for
    every tree (the all-ones vector is in its kernel), so the test is a
    relative tolerance on the smallest eigenvalue.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    L = laplacian(X)
    edge_weight = float(X.sum())
    if not math.isclose(edge_weight, 2.0 * (n - 1), abs_tol=1e-9):
        raise ValueError(
            f"expected total edge weight 2(n-1)={2 * (n - 1)}, got {edge_weight}"
        )
    c = spectral_constants(n)
    M = L + c.alpha * np.ones((n, n)) - c.beta * np.eye(n)
    return is_psd(M, rtol=rtol)


def matrix_to_edge_vector(X: np.ndarray, g: Graph) -> np.ndarray:
    """Extract the edge-indexed entries of a symmetric matrix supported on E."""
    X = np.asarray(X, dtype=float)
    if X.shape != (g.n, g.n):
        raise ValueError(f"expected shape {(g.n, g.n)}, got {X.shape}")
    if not np.allclose(X, X.T, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    support = X != 0.0
    np.fill_diagonal(support, False)
    if np.any(support & (g.adjacency == 0.0)):
        raise ValueError("matrix has support outside the edge set")
    if np.any(np.diag(X) != 0.0):
        raise ValueError("matrix has nonzero diagonal")
    return np.array([X[u, v] for u, v in g.edges])


def edge_vector_to_matrix(x: np.ndarray, g: Graph) -> np.ndarray:
    """Inverse of `matrix_to_edge_vector`: scatter edge values into a symmetric matrix."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.m,):
        raise ValueError(f"expected {g.m} edge values, got shape {x.shape}")
    X = np.zeros((g.n, g.n))
    for k, (u, v) in enumerate(g.edges):
        X[u, v] = x[k]
        X[v, u] = x[k]
    return X


def greedy_independent_partition(vertices, g: Graph) -> list[list[int]]:
    """Partition the given vertices into independent sets.

    Greedy in descending degree order (vertex id breaks ties), placing each
    vertex into the first class containing none of its neighbours.  The number
    of classes is what bounds the cluster count in the cyclic projection, so
    small is good but optimal is not required.
    """
    verts = sorted(set(int(i) for i in vertices))
    for i in verts:
        if not 0 <= i < g.n:
            raise ValueError(f"vertex {i} out of range")
    order = sorted(verts, key=lambda i: (-g.degree(i), i))
    classes: list[list[int]] = []
    for i in order:
        placed = False
        for cls in classes:
            if all(g.adjacency[i, j] == 0.0 for j in cls):
                cls.append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
    return [sorted(cls) for cls in classes]
