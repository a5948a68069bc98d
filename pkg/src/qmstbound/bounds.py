"""Bound computations: safe dual bounds, reference optima, heuristic trees.

The dual matrix S of the splitting solver turns into a lower bound that is
valid no matter where the iteration stopped:

    lb(S) = min { <Qpad + S, Ytil> : Ytil in the cut polytope }
            - n * lambda_max(W^T S W).

The minimum is a linear program; its reported value must never exceed the true
minimum or the bound claim breaks, so the LP value is certified through weak
duality (any sign-feasible multiplier vector gives a valid underestimate) and
floored against the closed-form minimum over the cut-free base set, which
contains the cut polytope.  The lambda term gets a tiny norm-proportional pad
in the same spirit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .graph import Graph
from .instances import Instance


@dataclass(frozen=True)
class SafeBound:
    """lb(S) split into its two ingredients: value = lp_value - n * lambda_max_term."""

    value: float
    lp_value: float
    lambda_max_term: float


def _base_min(Cs: np.ndarray, n: int, m: int) -> float:
    # exact minimum over the cut-free base set: off-diagonal pairs are free in
    # [0,1], the coupled diagonal runs over the capped simplex with total n-1
    iu = np.triu_indices(m, k=1)
    off = np.minimum(0.0, 2.0 * Cs[iu]).sum()
    w = np.sort(np.diagonal(Cs)[:m] + 2.0 * Cs[:m, m])
    return float(off + w[: n - 1].sum() + Cs[m, m])


def lp_min_over_cuts(C: np.ndarray, cuts, g: Graph, n: int) -> float:
    """Certified minimum of <C, Ytil> over the cut polytope.

    Without cuts the closed form is exact.  With cuts, solve the LP and
    recompute the value from the returned multipliers through weak duality so
    solver tolerance cannot push the reported value above the true minimum;
    the closed-form base value is a second valid floor.
    """
    C = np.asarray(C, dtype=float)
    m = g.m
    if C.shape != (m + 1, m + 1):
        raise ValueError(f"expected shape {(m + 1, m + 1)}, got {C.shape}")
    Cs = 0.5 * (C + C.T)
    base = _base_min(Cs, n, m)
    cutlist = sorted({(int(i), int(f)) for i, f in cuts})
    if not cutlist:
        return base

    iu_rows, iu_cols = np.triu_indices(m, k=1)
    npairs = iu_rows.size
    pair_pos = np.full((m, m), -1, dtype=np.intp)
    pair_pos[iu_rows, iu_cols] = np.arange(npairs)
    pair_pos[iu_cols, iu_rows] = np.arange(npairs)

    nvar = m + npairs
    c = np.empty(nvar)
    c[:m] = np.diagonal(Cs)[:m] + 2.0 * Cs[:m, m]
    c[m:] = 2.0 * Cs[iu_rows, iu_cols]
    const = float(Cs[m, m])

    A_eq = np.zeros((1, nvar))
    A_eq[0, :m] = 1.0
    b_eq = np.array([float(n - 1)])

    A_ub = np.zeros((len(cutlist), nvar))
    for r, (i, f) in enumerate(cutlist):
        incident = set(int(e) for e in g.delta(i))
        A_ub[r, f] = 0.0 if f in incident else 1.0
        for e in incident - {f}:
            A_ub[r, m + pair_pos[e, f]] = -1.0
    b_ub = np.zeros(len(cutlist))

    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=(0.0, 1.0), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed with status {res.status}: {res.message}")

    # weak-duality certificate; marginal sign conventions differ across scipy
    # versions, so evaluate both and keep the best (every candidate is valid)
    mi = np.asarray(res.ineqlin.marginals, dtype=float)
    me = np.asarray(res.eqlin.marginals, dtype=float)
    best = -np.inf
    for si in (1.0, -1.0):
        lam = np.clip(si * mi, 0.0, None)
        for se in (1.0, -1.0):
            mu = se * me
            r = c + A_ub.T @ lam + A_eq.T @ mu
            gval = float(-lam @ b_ub - mu @ b_eq + np.minimum(0.0, r).sum())
            best = max(best, gval)
    return max(best + const, base)


def safe_lower_bound(S: np.ndarray, qpad: np.ndarray, W: np.ndarray, cuts,
                     g: Graph, n: int) -> SafeBound:
    """Stopping-point-independent lower bound from a dual matrix S."""
    S = np.asarray(S, dtype=float)
    qpad = np.asarray(qpad, dtype=float)
    if S.shape != qpad.shape or S.shape != (g.m + 1, g.m + 1):
        raise ValueError("dual and padded cost must both be lifted matrices")
    lp_value = lp_min_over_cuts(qpad + S, cuts, g, n)
    WSW = W.T @ S @ W
    lam = float(np.linalg.eigvalsh(0.5 * (WSW + WSW.T))[-1])
    # pad against eigenvalue rounding so the subtraction can only deepen
    lam_term = lam + 1e-9 * float(np.linalg.norm(S))
    return SafeBound(value=lp_value - n * lam_term, lp_value=lp_value,
                     lambda_max_term=lam_term)


class _RollbackDSU:
    """Union-find with an undo trail; no path compression so undo stays exact."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.comps = n
        self.trail: list[int] = []

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            x = p[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.comps -= 1
        self.trail.append(ry)
        return True

    def snapshot(self) -> int:
        return len(self.trail)

    def rollback(self, snap: int) -> None:
        while len(self.trail) > snap:
            ry = self.trail.pop()
            rx = self.parent[ry]
            self.size[rx] -= self.size[ry]
            self.parent[ry] = ry
            self.comps += 1


def _can_connect(dsu: _RollbackDSU, edges, k: int) -> bool:
    # can the remaining edges edges[k:] still merge everything into one part?
    if dsu.comps == 1:
        return True
    if len(edges) - k < dsu.comps - 1:
        return False
    snap = dsu.snapshot()
    for j in range(k, len(edges)):
        u, v = edges[j]
        if dsu.union(u, v) and dsu.comps == 1:
            break
    ok = dsu.comps == 1
    dsu.rollback(snap)
    return ok


def spanning_trees(g: Graph):
    """Yield every spanning tree as a sorted tuple of edge indices.

    Recursive include/exclude over the edge list with connectivity pruning;
    each tree is produced exactly once.
    """
    edges = g.edges
    m = g.m
    dsu = _RollbackDSU(g.n)
    chosen: list[int] = []

    def rec(k: int):
        if dsu.comps == 1:
            yield tuple(chosen)
            return
        if k == m or not _can_connect(dsu, edges, k):
            return
        u, v = edges[k]
        if dsu.union(u, v):
            chosen.append(k)
            yield from rec(k + 1)
            chosen.pop()
            dsu.rollback(dsu.snapshot() - 1)
        yield from rec(k + 1)

    yield from rec(0)


def brute_force_qmstp(inst: Instance) -> tuple[float, np.ndarray]:
    """Exact optimum by exhaustive tree search; guarded to n <= 12.

    Same include/exclude recursion as `spanning_trees` plus, for entrywise
    nonnegative cost matrices, a completion bound: marginal costs of undecided
    edges only grow as the tree fills up, so partial cost plus the smallest
    (components-1) current marginals underestimates every completion.  Search
    order is by diagonal cost so good trees appear early.
    """
    g = inst.graph
    n, m = g.n, g.m
    if n > 12:
        raise ValueError(f"brute force limited to n <= 12, got n={n}")
    Q = inst.q
    order = np.argsort(np.diagonal(Q), kind="stable")
    edges = [g.edges[int(j)] for j in order]
    Qs = Q[np.ix_(order, order)]
    dg = np.diagonal(Qs).copy()
    nonneg = bool(np.all(Q >= 0.0))

    best_val, hx = heuristic_upper_bound(inst)
    best_x = hx.copy()

    dsu = _RollbackDSU(n)
    chosen: list[int] = []
    csum = np.zeros(m)
    cost = 0.0

    def rec(k: int):
        nonlocal cost, csum, best_val, best_x
        if dsu.comps == 1:
            if cost < best_val - 1e-12:
                best_val = cost
                x = np.zeros(m)
                x[order[chosen]] = 1.0
                best_x = x
            return
        if k == m:
            return
        if nonneg:
            # Kruskal forest over the undecided edges with marginals frozen at
            # the current tree.  Marginals only grow once more edges enter, and
            # every completion connects the current components, so this both
            # bounds the completion cost and settles connectivity.
            need = dsu.comps - 1
            margs = dg[k:] + 2.0 * csum[k:]
            snap = dsu.snapshot()
            lb_add = 0.0
            joined = 0
            for j in np.argsort(margs, kind="stable"):
                e = edges[k + int(j)]
                if dsu.union(e[0], e[1]):
                    lb_add += margs[j]
                    joined += 1
                    if joined == need:
                        break
            dsu.rollback(snap)
            if joined < need or cost + lb_add >= best_val - 1e-9:
                return
        elif not _can_connect(dsu, edges, k):
            return
        u, v = edges[k]
        if dsu.union(u, v):
            dcost = dg[k] + 2.0 * csum[k]
            cost += dcost
            csum += Qs[:, k]
            chosen.append(k)
            rec(k + 1)
            chosen.pop()
            csum -= Qs[:, k]
            cost -= dcost
            dsu.rollback(dsu.snapshot() - 1)
        rec(k + 1)

    rec(0)
    return float(best_val), best_x


def _tree_cost(Q: np.ndarray, x: np.ndarray) -> float:
    return float(x @ Q @ x)


def _greedy_tree(g: Graph, Q: np.ndarray) -> list[int]:
    m = g.m
    dsu = _RollbackDSU(g.n)
    csum = np.zeros(m)
    sel: list[int] = []
    in_tree = np.zeros(m, dtype=bool)
    for _ in range(g.n - 1):
        margs = np.diagonal(Q) + 2.0 * csum
        best_e = -1
        best_marg = np.inf
        for e in range(m):
            if in_tree[e]:
                continue
            u, v = g.edges[e]
            if dsu.find(u) != dsu.find(v) and margs[e] < best_marg:
                best_marg = margs[e]
                best_e = e
        u, v = g.edges[best_e]
        dsu.union(u, v)
        in_tree[best_e] = True
        sel.append(best_e)
        csum += Q[:, best_e]
    return sel


def _random_tree(g: Graph, rng: np.random.Generator) -> list[int]:
    dsu = _RollbackDSU(g.n)
    sel = []
    for e in rng.permutation(g.m):
        u, v = g.edges[int(e)]
        if dsu.union(u, v):
            sel.append(int(e))
            if dsu.comps == 1:
                break
    return sel


def _component_labels(g: Graph, tree: list[int], removed: int) -> np.ndarray:
    lab = np.arange(g.n)
    dsu = _RollbackDSU(g.n)
    for e in tree:
        if e != removed:
            u, v = g.edges[e]
            dsu.union(u, v)
    for i in range(g.n):
        lab[i] = dsu.find(i)
    return lab


def _local_search(g: Graph, Q: np.ndarray, sel: list[int],
                  max_sweeps: int = 1000) -> list[int]:
    # 1-edge exchange: drop a tree edge, add the best reconnecting edge
    m = g.m
    sel = list(sel)
    in_tree = np.zeros(m, dtype=bool)
    in_tree[sel] = True
    csum = Q[:, sel].sum(axis=1)
    for _ in range(max_sweeps):
        improved = False
        for t in list(sel):
            lab = _component_labels(g, sel, t)
            drop = 2.0 * csum[t] - Q[t, t]
            best_f = -1
            best_add = drop - 1e-12
            for f in range(m):
                if in_tree[f]:
                    continue
                u, v = g.edges[f]
                if lab[u] == lab[v]:
                    continue
                add = Q[f, f] + 2.0 * (csum[f] - Q[t, f])
                if add < best_add:
                    best_add = add
                    best_f = f
            if best_f >= 0:
                sel.remove(t)
                sel.append(best_f)
                in_tree[t] = False
                in_tree[best_f] = True
                csum += Q[:, best_f] - Q[:, t]
                improved = True
                break
        if not improved:
            break
    return sel


def heuristic_upper_bound(inst: Instance, effort: int = 4) -> tuple[float, np.ndarray]:
    """Feasible tree cost: greedy marginal-cost construction plus 1-edge
    exchange, repeated from `effort - 1` random trees; deterministic."""
    if effort < 1:
        raise ValueError("effort must be at least 1")
    g = inst.graph
    Q = inst.q
    best_val = np.inf
    best_x = None
    starts = [_greedy_tree(g, Q)]
    for r in range(effort - 1):
        starts.append(_random_tree(g, np.random.default_rng(r)))
    for sel in starts:
        sel = _local_search(g, Q, sel)
        x = np.zeros(g.m)
        x[sel] = 1.0
        val = _tree_cost(Q, x)
        if val < best_val:
            best_val = val
            best_x = x
    return float(best_val), best_x
