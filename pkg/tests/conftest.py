"""Shared test helpers and the acceptance summary hook."""

import numpy as np

from qmstbound.graph import Graph

# filled by test_acceptance, printed after the run so the pass/fail lines
# survive pytest's output capture
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def random_connected_graph(n, m, rng):
    """Uniform connected graph with n vertices and m edges by rejection."""
    from itertools import combinations
    pairs = list(combinations(range(n), 2))
    for _ in range(1000):
        idx = sorted(rng.choice(len(pairs), size=m, replace=False))
        try:
            return Graph(n, [pairs[int(i)] for i in idx])
        except ValueError:
            continue  # disconnected sample
    raise RuntimeError("rejection sampling failed")


def random_independent_set(g, rng, exclude=()):
    """Greedy independent set from a random vertex order."""
    chosen = []
    for i in rng.permutation(g.n):
        i = int(i)
        if i in exclude:
            continue
        if all(g.adjacency[i, j] == 0.0 for j in chosen):
            chosen.append(i)
    return chosen


def tree_lift(g, x):
    """The integer lifted matrix (xx^T, x; x^T, 1) of an edge vector x."""
    x = np.asarray(x, dtype=float)
    top = np.concatenate([np.outer(x, x), x[:, None]], axis=1)
    bottom = np.concatenate([x, [1.0]])
    return np.concatenate([top, bottom[None, :]], axis=0)
