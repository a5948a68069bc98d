"""Euclidean projections used by the splitting solver.

The two prox steps of the solver need projections onto

* the spectral side: PSD matrices with fixed trace, handled by an eigenvalue
  decomposition plus a simplex projection of the spectrum, and
* the polyhedral side: the box-constrained lifted set (entries in [0,1],
  diagonal of the edge block equal to the border column, unit corner, trace n),
  optionally intersected with a family of star inequalities

      sum_{e incident to i} Y[f, e] >= y_f        for active pairs (i, f).

With active star inequalities the polyhedral projection has no closed form;
it is computed by Dykstra's cyclic scheme over the plain lifted set and
"cluster" sets.  A cluster collects, for each edge f, a set of vertices that
is independent in the graph, which makes the rows of the cluster projection
decouple: each row solves a small QP with one averaged triple of tied entries
and at most one active threshold, available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import Graph, greedy_independent_partition


def project_simplex(v: np.ndarray, s: float) -> np.ndarray:
    """Project v onto {x >= 0, sum(x) = s} by the sorted-threshold rule."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty vector")
    if s <= 0:
        raise ValueError(f"simplex total must be positive, got {s}")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ranks = np.arange(1, v.size + 1)
    hit = u - (css - s) / ranks > 0
    rho = int(np.nonzero(hit)[0][-1])
    theta = (css[rho] - s) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_capped_simplex(v: np.ndarray, s: float, tol: float = 1e-12) -> np.ndarray:
    """Project v onto {0 <= x <= 1, sum(x) = s}.

    Bisection on the dual shift theta of x = clip(v - theta, 0, 1), followed by
    one exact solve on the identified free set so the sum constraint holds to
    machine precision.
    """
    v = np.asarray(v, dtype=float)
    p = v.size
    if v.ndim != 1 or p == 0:
        raise ValueError("expected a nonempty vector")
    if not 0 < s <= p:
        raise ValueError(f"need 0 < s <= {p}, got s={s}")
    if s == p:
        return np.ones(p)
    lo = float(v.min()) - 1.0
    hi = float(v.max())
    span = max(1.0, hi - lo)
    while hi - lo > tol * span:
        mid = 0.5 * (lo + hi)
        if np.clip(v - mid, 0.0, 1.0).sum() > s:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    x = np.clip(v - theta, 0.0, 1.0)
    shifted = v - theta
    free = (shifted > 0.0) & (shifted < 1.0)
    nfree = int(free.sum())
    if nfree > 0:
        n_ones = int((shifted >= 1.0).sum())
        theta_exact = (v[free].sum() + n_ones - s) / nfree
        x_exact = np.clip(v - theta_exact, 0.0, 1.0)
        # keep the polish only when it does not cross a breakpoint
        if abs(x_exact.sum() - s) <= abs(x.sum() - s):
            x = x_exact
    return x


def project_spectraplex(M: np.ndarray, s: float) -> np.ndarray:
    """Project onto {X PSD, trace(X) = s}: simplex projection of the spectrum."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    A = 0.5 * (M + M.T)
    lam, U = np.linalg.eigh(A)
    lam = project_simplex(lam, s)
    out = (U * lam) @ U.T
    return 0.5 * (out + out.T)


def project_lifted_box(M: np.ndarray, n: int) -> np.ndarray:
    """Project onto the lifted box set.

    The target set: symmetric (m+1) x (m+1) matrices with all entries in
    [0, 1], edge-block diagonal equal to the border column, corner entry 1 and
    trace n.  The coupled part (each diagonal entry appears once on the
    diagonal and twice on the border) reduces to a capped-simplex projection
    of diag/3 + 2*border/3 with total n-1; off-diagonal entries just clamp.
    """
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    m = d - 1
    if M.ndim != 2 or M.shape[0] != M.shape[1] or m < 1:
        raise ValueError(f"expected a square lifted matrix, got shape {M.shape}")
    if not n - 1 <= m:
        raise ValueError(f"capped simplex infeasible: n-1={n - 1} > m={m}")
    A = 0.5 * (M + M.T)
    Z = A[:m, :m]
    z = A[:m, m]
    v = project_capped_simplex(np.diagonal(Z) / 3.0 + 2.0 * z / 3.0, float(n - 1))
    out = np.empty((d, d))
    out[:m, :m] = np.clip(Z, 0.0, 1.0)
    out[np.diag_indices(m)] = v
    out[:m, m] = v
    out[m, :m] = v
    out[m, m] = 1.0
    return out


def project_row_cuts(a: np.ndarray, f: int, K, g: Graph) -> np.ndarray:
    """Project one lifted row onto its tied-triple and star-inequality set.

    Layout of `a` (length m+2): entries 0..m-1 are row f of the edge block,
    entry m is the border column entry of row f, entry m+1 the border row
    entry of column f.  The target set ties a[f] = a[m] = a[m+1] and requires
    sum(a[delta(i)]) >= a[f] for every vertex i in K, which must be
    independent in g.

    Closed form: an endpoint of f in K decouples (its inequality loses the
    tied value entirely) and gets a halfspace correction when its remaining
    incident sum is negative.  For the other vertices, sort the slacks

        g_i = mean(triple) - sum(a[delta(i)])

    in decreasing order and find the largest p whose threshold

        omega(p) = (sum_{j<=p} g_j / d_j) / (3 + sum_{j<=p} 1 / d_j)

    is strictly exceeded by g at position p; the first p vertices are active:
    their incident entries move up by (g_i - omega)/d_i and the tied triple
    becomes mean(triple) - omega.  With no active vertex the triple is simply
    averaged.
    """
    a = np.asarray(a, dtype=float)
    m = g.m
    if a.shape != (m + 2,):
        raise ValueError(f"expected a vector of length {m + 2}, got shape {a.shape}")
    if not 0 <= f < m:
        raise ValueError(f"edge index {f} out of range")
    K = sorted(set(int(i) for i in K))
    for i in K:
        if not 0 <= i < g.n:
            raise ValueError(f"vertex {i} out of range")
    for ii in range(len(K)):
        for jj in range(ii + 1, len(K)):
            if g.adjacency[K[ii], K[jj]] != 0.0:
                raise ValueError(f"vertex set not independent: {K[ii]} ~ {K[jj]}")

    t = (a[f] + a[m] + a[m + 1]) / 3.0
    z = a.copy()
    u, w = g.endpoints(f)

    for i in (u, w):
        if i in K and g.degree(i) > 1:
            idx = g.delta(i)
            idx = idx[idx != f]
            ssum = float(a[idx].sum())
            if ssum < 0.0:
                z[idx] = a[idx] - ssum / idx.size

    shift = t
    interior = np.array([i for i in K if i != u and i != w], dtype=np.intp)
    if interior.size:
        d = np.array([g.degree(i) for i in interior], dtype=float)
        sums = np.array([a[g.delta(i)].sum() for i in interior])
        gvals = t - sums
        order = np.lexsort((interior, -gvals))
        gs = gvals[order]
        ds = d[order]
        omega = np.cumsum(gs / ds) / (3.0 + np.cumsum(1.0 / ds))
        above = np.nonzero(gs > omega)[0]
        if above.size:
            p = int(above[-1]) + 1
            om = float(omega[p - 1])
            shift = t - om
            for j in order[:p]:
                i = int(interior[j])
                idx = g.delta(i)
                z[idx] = a[idx] + (gvals[j] - om) / g.degree(i)

    z[f] = z[m] = z[m + 1] = shift
    return z


@dataclass(frozen=True)
class CutClusters:
    """Active star inequalities grouped into per-edge independent layers.

    Layer k maps each edge f to the k-th independent class of the vertices
    cutting f; the layers are what the cyclic projection iterates over, so
    their count is the price of the current cut pool.
    """

    graph: Graph
    cuts: frozenset
    clusters: tuple

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def __len__(self) -> int:
        return len(self.cuts)


def cluster_cuts(cuts, g: Graph) -> CutClusters:
    """Group (vertex, edge) pairs into projection layers; duplicates collapse."""
    cutset = set()
    for i, f in cuts:
        i, f = int(i), int(f)
        if not 0 <= i < g.n:
            raise ValueError(f"vertex {i} out of range")
        if not 0 <= f < g.m:
            raise ValueError(f"edge index {f} out of range")
        cutset.add((i, f))
    per_edge: dict[int, list[int]] = {}
    for i, f in sorted(cutset):
        per_edge.setdefault(f, []).append(i)
    layers: list[dict[int, tuple]] = []
    for f in sorted(per_edge):
        for k, cls in enumerate(greedy_independent_partition(per_edge[f], g)):
            while len(layers) <= k:
                layers.append({})
            layers[k][f] = tuple(cls)
    return CutClusters(graph=g, cuts=frozenset(cutset), clusters=tuple(layers))


class DykstraResult(NamedTuple):
    ytil: np.ndarray
    cycles: int
    half_steps: int
    converged: bool
    residuals: tuple = ()  # per-cycle ||X_old - X||_F


def _apply_cluster(X: np.ndarray, layer: dict, g: Graph) -> np.ndarray:
    # rows touched by distinct edges are disjoint, so order inside a layer is free
    X = X.copy()
    m = g.m
    for f, K in layer.items():
        a = np.empty(m + 2)
        a[:m] = X[f, :m]
        a[m] = X[f, m]
        a[m + 1] = X[m, f]
        z = project_row_cuts(a, f, K, g)
        X[f, :m] = z[:m]
        X[f, m] = z[m]
        X[m, f] = z[m + 1]
    return X


def dykstra_project(M: np.ndarray, clusters: CutClusters, n: int,
                    eps_proj: float = 1e-5,
                    max_half_steps: int | None = None) -> DykstraResult:
    """Project onto the lifted box set intersected with the active cuts.

    Dykstra's scheme with one correction matrix per constraint set: cycle
    through the lifted box projection and every cluster layer, each time
    projecting the current iterate plus its stored correction and updating the
    correction to the leftover.  Stops once a full cycle moves both the
    iterate and the corrections by less than eps_proj in Frobenius norm.  The
    iterate displacement alone is not a safe test: the iterate can sit still
    for a cycle while the corrections ramp toward an active-set change, and
    stopping there returns a point far from the cut sets.  The correction
    increments do vanish at the solution (the sets are polyhedral), so the
    combined test cannot stall forever.  With no active cuts this is a single
    lifted box projection.

    The returned matrix is symmetrized; the cluster steps work on rows only
    and leave transposed entries to the box steps, so the raw iterate can
    carry an asymmetry on the order of the stopping tolerance.
    """
    M = np.asarray(M, dtype=float)
    g = clusters.graph
    if M.shape != (g.m + 1, g.m + 1):
        raise ValueError(f"expected shape {(g.m + 1, g.m + 1)}, got {M.shape}")
    nmax = clusters.n_clusters
    if nmax == 0:
        return DykstraResult(project_lifted_box(M, n), cycles=1, half_steps=1,
                             converged=True)
    cap = max_half_steps if max_half_steps is not None else 10 * (nmax + 1) * 1000
    X = M.copy()
    P = np.zeros_like(X)
    corr = [np.zeros_like(X) for _ in range(nmax)]
    halves = 0
    cycles = 0
    converged = False
    residuals = []
    while halves < cap:
        X_old = X
        tmp = X + P
        X = project_lifted_box(tmp, n)
        corr_sq = np.linalg.norm(tmp - X - P) ** 2
        P = tmp - X
        halves += 1
        for k in range(nmax):
            tmp = X + corr[k]
            X = _apply_cluster(tmp, clusters.clusters[k], g)
            corr_sq += np.linalg.norm(tmp - X - corr[k]) ** 2
            corr[k] = tmp - X
            halves += 1
        cycles += 1
        residuals.append(float(np.linalg.norm(X - X_old)))
        if residuals[-1] < eps_proj and np.sqrt(corr_sq) < eps_proj:
            converged = True
            break
    return DykstraResult(ytil=0.5 * (X + X.T), cycles=cycles, half_steps=halves,
                         converged=converged, residuals=tuple(residuals))
