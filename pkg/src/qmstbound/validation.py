"""Numerical self-checks of the model-side claims.

Three groups:

* a K4 point feasible for every cut-set constraint of the linear relaxation
  whose lifted matrix fails positive semidefiniteness (eigenvalue -1/3), so
  the linear side does not dominate the spectral side;
* a K4 point feasible for the spectral tree characterization whose single
  vertex cut falls to 3/4 < 1, so the spectral side does not dominate the
  linear side either;
* rounding identities: floor(|S| (|S| alpha - beta)) = -1 for every nonempty
  proper vertex subset, and every integer spanning tree lift satisfies all
  cut-set and star inequalities.

Each check recomputes everything from the embedded rational data; the
perturbation arguments exist so tests can confirm the checks actually bite.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .graph import (Graph, is_psd, laplacian, matrix_to_edge_vector,
                    min_eigenvalue, spectral_constants)
from .bounds import spanning_trees

# K4 with the canonical edge order: the first three edges form the star at
# vertex 0, the last three the triangle on {1,2,3}; the embedded matrices
# below are blocked along exactly that split.
_K4 = Graph.complete(4)

_X_CUTSET = np.array([2, 2, 2, 1, 1, 1]) / 3.0
_Y_CUTSET = np.block([
    [np.eye(3) / 3.0 + np.ones((3, 3)) / 3.0, 2.0 * np.eye(3) / 3.0],
    [2.0 * np.eye(3) / 3.0, np.eye(3) / 3.0],
])

_X_MISDP = np.array([
    [0.0, 0.25, 0.25, 0.25],
    [0.25, 0.0, 0.75, 0.75],
    [0.25, 0.75, 0.0, 0.75],
    [0.25, 0.75, 0.75, 0.0],
])
_Y_MISDP = np.block([
    [np.ones((3, 3)) / 16.0 + 3.0 * np.eye(3) / 16.0, 3.0 * np.ones((3, 3)) / 16.0],
    [3.0 * np.ones((3, 3)) / 16.0, 9.0 * np.ones((3, 3)) / 16.0 + 3.0 * np.eye(3) / 16.0],
])


@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    title: str
    items: tuple

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def lines(self) -> list[str]:
        out = [f"{'PASS' if self.passed else 'FAIL'}  {self.title}"]
        for item in self.items:
            mark = "ok" if item.passed else "FAIL"
            out.append(f"    [{mark}] {item.name}: {item.detail}")
        return out


def _subset_cut_weight(g: Graph, x: np.ndarray, subset: set) -> float:
    total = 0.0
    for k, (u, v) in enumerate(g.edges):
        if (u in subset) != (v in subset):
            total += x[k]
    return total


def check_cutset_counterexample(x: np.ndarray | None = None,
                                y: np.ndarray | None = None) -> ValidationReport:
    """The cut-set-feasible K4 point whose lift is not PSD."""
    g = _K4
    x = _X_CUTSET if x is None else np.asarray(x, dtype=float)
    y = _Y_CUTSET if y is None else np.asarray(y, dtype=float)
    items = []

    items.append(CheckItem(
        "diagonal matches edge vector",
        bool(np.allclose(np.diagonal(y), x, atol=1e-12)),
        f"max dev {np.abs(np.diagonal(y) - x).max():.2e}",
    ))
    rowsum_dev = float(np.abs(y @ np.ones(6) - (g.n - 1) * x).max())
    items.append(CheckItem(
        "row sums equal (n-1) times edge vector",
        rowsum_dev <= 1e-12, f"max dev {rowsum_dev:.2e}",
    ))
    items.append(CheckItem(
        "entries within [0, 1]",
        bool((y >= -1e-12).all() and (y <= 1 + 1e-12).all()
             and (x >= -1e-12).all() and (x <= 1 + 1e-12).all()),
        "elementwise box",
    ))
    worst = min(
        _subset_cut_weight(g, x, set(sub))
        for r in range(1, g.n)
        for sub in combinations(range(g.n), r)
    )
    items.append(CheckItem(
        "every cut-set constraint holds",
        worst >= 1.0 - 1e-12, f"min cut weight {worst:.6f}",
    ))
    z = np.block([[y, x[:, None]], [x[None, :], np.ones((1, 1))]])
    lam = min_eigenvalue(z)
    items.append(CheckItem(
        "lifted matrix has eigenvalue -1/3",
        abs(lam + 1.0 / 3.0) <= 1e-9,
        f"min eigenvalue {lam:.9f}",
    ))
    return ValidationReport("cut-set feasible point with non-PSD lift (K4)",
                           tuple(items))


def check_misdp_counterexample(x_matrix: np.ndarray | None = None,
                               y: np.ndarray | None = None) -> ValidationReport:
    """The spectrally feasible K4 point violating a single-vertex cut."""
    g = _K4
    X = _X_MISDP if x_matrix is None else np.asarray(x_matrix, dtype=float)
    y = _Y_MISDP if y is None else np.asarray(y, dtype=float)
    n = g.n
    items = []

    box_ok = (
        np.allclose(X, X.T, atol=1e-12)
        and np.abs(np.diagonal(X)).max() <= 1e-12
        and (X >= -1e-12).all() and (X <= 1 + 1e-12).all()
    )
    items.append(CheckItem("edge matrix is symmetric, hollow, within [0,1]",
                           bool(box_ok), "shape constraints"))
    total = float(X.sum())
    items.append(CheckItem(
        "total weight is 2(n-1)",
        abs(total - 2.0 * (n - 1)) <= 1e-12, f"sum {total:.6f}",
    ))
    c = spectral_constants(n)
    M = laplacian(X) + c.alpha * np.ones((n, n)) - c.beta * np.eye(n)
    items.append(CheckItem(
        "spectral tree certificate holds",
        is_psd(M), f"min eigenvalue {min_eigenvalue(M):.2e}",
    ))
    x = matrix_to_edge_vector(X, g)
    items.append(CheckItem(
        "lift diagonal matches edge vector",
        bool(np.allclose(np.diagonal(y), x, atol=1e-12)),
        f"max dev {np.abs(np.diagonal(y) - x).max():.2e}",
    ))
    z = np.block([[y, x[:, None]], [x[None, :], np.ones((1, 1))]])
    items.append(CheckItem(
        "bordered lift is PSD",
        is_psd(z), f"min eigenvalue {min_eigenvalue(z):.2e}",
    ))
    star = float(_subset_cut_weight(g, x, {0}))
    items.append(CheckItem(
        "single-vertex cut at the star center is violated (3/4 < 1)",
        abs(star - 0.75) <= 1e-12 and star < 1.0, f"cut weight {star:.6f}",
    ))
    return ValidationReport("spectrally feasible point violating a cut (K4)",
                           tuple(items))


def check_cg_identities(g: Graph, check_trees: bool = True) -> ValidationReport:
    """Rounding identity on all proper subsets; integer lifts satisfy all cuts."""
    n = g.n
    if n < 3:
        raise ValueError(f"need n >= 3, got n={n}")
    c = spectral_constants(n)
    items = []

    bad = 0
    count = 0
    for r in range(1, n):
        for sub in combinations(range(n), r):
            s = len(sub)
            val = s * (s * c.alpha - c.beta)
            if int(np.floor(val)) != -1:
                bad += 1
            count += 1
    items.append(CheckItem(
        f"floor identity on all {count} proper subsets",
        bad == 0, f"{bad} violations",
    ))

    if check_trees:
        m = g.m
        subsets = [set(sub) for r in range(1, n) for sub in combinations(range(n), r)]
        crossing = np.zeros((len(subsets), m))
        for si, sub in enumerate(subsets):
            for k, (u, v) in enumerate(g.edges):
                if (u in sub) != (v in sub):
                    crossing[si, k] = 1.0
        inc = np.zeros((n, m))
        for k, (u, v) in enumerate(g.edges):
            inc[u, k] = 1.0
            inc[v, k] = 1.0
        n_trees = 0
        worst_cut = np.inf
        worst_star = np.inf
        for tree in spanning_trees(g):
            x = np.zeros(m)
            x[list(tree)] = 1.0
            worst_cut = min(worst_cut, float((crossing @ x).min()))
            # star inequalities at the integer lift y = x x^T reduce to
            # every vertex being covered by the tree
            worst_star = min(worst_star, float((inc @ x).min()))
            n_trees += 1
        items.append(CheckItem(
            f"cut-set constraints on all {n_trees} spanning trees",
            worst_cut >= 1.0 - 1e-12, f"min cut weight {worst_cut:.6f}",
        ))
        items.append(CheckItem(
            f"star inequalities on all {n_trees} integer lifts",
            worst_star >= 1.0 - 1e-12, f"min star weight {worst_star:.6f}",
        ))
    return ValidationReport(f"rounding and integrality sweep (n={n}, m={g.m})",
                           tuple(items))


def run_all(max_n: int = 6) -> list[ValidationReport]:
    """The standard battery: both counterexamples plus one sweep report."""
    reports = [check_cutset_counterexample(), check_misdp_counterexample()]
    sweep_items = []
    for n in range(3, max_n + 1):
        rep = check_cg_identities(Graph.complete(n))
        for item in rep.items:
            sweep_items.append(CheckItem(f"n={n} {item.name}", item.passed,
                                         item.detail))
    reports.append(ValidationReport(
        "rounding identity and tree feasibility sweep", tuple(sweep_items)))
    return reports
