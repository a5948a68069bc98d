"""Peaceman-Rachford splitting on the facially reduced DNN relaxation.

The relaxation splits the lifted matrix into two copies: a spectral variable
R living on {R PSD, trace R = n} in the reduced coordinates, and a polyhedral
variable living on the lifted box set with the active star inequalities.  The
coupling constraint Ytil = W R W^T carries the facial range space W, an
orthonormal basis of the null space of the single exposed direction

    T = (1, ..., 1, -(n-1)),

obtained from a QR factorization.  One iteration with penalty tau and step
weights gamma1, gamma2:

    R    <- project_spectraplex(W^T (Ytil + S/tau) W, n)
    S    <- S + gamma1 * tau * (Ytil - W R W^T)
    Ytil <- project onto the cut polytope of (W R W^T - (Qpad + S)/tau)
    S    <- S + gamma2 * tau * (Ytil - W R W^T)

The outer loop alternates solving to a residual tolerance, turning the dual S
into a bound that stays valid at any stopping point, and adding the most
violated star inequalities found at the current primal point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .bounds import SafeBound, safe_lower_bound
from .graph import Graph
from .instances import Instance, pad_cost
from .projections import (CutClusters, cluster_cuts, dykstra_project,
                          project_spectraplex)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass
class PrsmParams:
    """Solver knobs; `None` for tau and ncutsmax means per-instance defaults."""

    tau: float | None = None
    gamma1: float = 0.9
    gamma2: float = 1.0
    eps_prsm: float = 1e-4
    eps_proj: float = 1e-5
    cut_violation_eps: float = 1e-3
    ncutsmax: int | None = None
    ncutsmin: int = 10
    epslbimprov: float = 1e-3
    noutermax: int = 10
    max_total_iters: int = 10000
    time_limit: float = 10800.0

    def validate(self) -> None:
        if self.tau is not None and not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not -1.0 < self.gamma1 < 1.0:
            raise ValueError(f"gamma1 must lie in (-1, 1), got {self.gamma1}")
        if not 0.0 < self.gamma2 < GOLDEN:
            raise ValueError(f"gamma2 must lie in (0, {GOLDEN}), got {self.gamma2}")
        if not self.gamma1 + self.gamma2 > 0:
            raise ValueError("gamma1 + gamma2 must be positive")
        if not abs(self.gamma1) < 1.0 + self.gamma2 - self.gamma2 ** 2:
            raise ValueError(
                f"|gamma1| must stay below 1 + gamma2 - gamma2^2 = "
                f"{1.0 + self.gamma2 - self.gamma2 ** 2}"
            )
        for name in ("eps_prsm", "eps_proj", "cut_violation_eps", "epslbimprov"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.ncutsmax is not None and self.ncutsmax < 1:
            raise ValueError("ncutsmax must be at least 1")
        if self.ncutsmin < 0:
            raise ValueError("ncutsmin must be nonnegative")
        if self.noutermax < 1 or self.max_total_iters < 1:
            raise ValueError("iteration limits must be at least 1")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


@dataclass
class PrsmState:
    R: np.ndarray
    ytil: np.ndarray
    S: np.ndarray
    clusters: CutClusters
    inner_count: int = 0
    outer_count: int = 0
    best_valid_lb: float = -np.inf


@dataclass(frozen=True)
class OuterRound:
    index: int
    valid_lb: SafeBound
    inner_iterations: int
    primal_residual: float
    dual_residual: float
    inner_stop: str
    n_violated_found: int
    n_cuts_added: int
    n_active_cuts: int
    elapsed: float


@dataclass(frozen=True)
class BoundResult:
    lb_dnn: float
    time_dnn: float
    lb_cuts: float
    time_total: float
    iterations: int
    cuts_added: int
    outer_log: tuple
    termination_reason: str


def facial_basis(m: int, n: int) -> np.ndarray:
    """Orthonormal basis of the facial range space as an (m+1) x m matrix."""
    if m < 1 or n < 3:
        raise ValueError(f"need m >= 1 and n >= 3, got m={m}, n={n}")
    A = np.vstack([(n - 1.0) * np.eye(m), np.ones((1, m))])
    W, _ = np.linalg.qr(A)
    T = np.concatenate([np.ones(m), [-(n - 1.0)]])
    # the stack has full column rank for every n, so rank loss cannot occur
    assert np.abs(W.T @ W - np.eye(m)).max() < 1e-12
    assert np.abs(W.T @ T).max() < 1e-12 * np.linalg.norm(T)
    return W


def default_penalty(q: np.ndarray) -> float:
    """Data-driven penalty: balances trace against Frobenius norm of the cost."""
    q = np.asarray(q, dtype=float)
    m = q.shape[0]
    qf = float(np.linalg.norm(q))
    if qf == 0.0:
        return 1.0
    tr = float(np.trace(q))
    qmax, qmin = max(tr, qf), min(tr, qf)
    if qmin <= 0.0:
        # a nonpositive trace makes the ratio test meaningless
        return float(np.sqrt(qf))
    if qmax / qmin < 1.2:
        return float(np.sqrt(qmin / (m + 1) * qf))
    return float(np.sqrt(qmax / qmin * qf))


def initial_lifted(n: int, m: int) -> np.ndarray:
    """Starting point: expectation of a uniformly random (n-1)-subset lift."""
    if m < max(2, n - 1):
        raise ValueError(f"need m >= max(2, n-1), got m={m}, n={n}")
    y0 = (n - 1) / m
    off = (n - 1) * (n - 2) / (m * (m - 1))
    out = np.full((m + 1, m + 1), off)
    out[np.diag_indices(m + 1)] = y0
    out[:m, m] = y0
    out[m, :m] = y0
    out[m, m] = 1.0
    return out


def inner_step(state: PrsmState, params: PrsmParams, qpad: np.ndarray,
               W: np.ndarray) -> PrsmState:
    """One splitting iteration; params.tau must be resolved to a number."""
    tau = params.tau
    if tau is None:
        raise ValueError("params.tau must be resolved before stepping")
    g = state.clusters.graph
    n = g.n
    ytil, S = state.ytil, state.S
    R = project_spectraplex(W.T @ (ytil + S / tau) @ W, float(n))
    WRW = W @ R @ W.T
    WRW = 0.5 * (WRW + WRW.T)
    S = S + (params.gamma1 * tau) * (ytil - WRW)
    target = WRW - (qpad + S) / tau
    ytil = dykstra_project(target, state.clusters, n, eps_proj=params.eps_proj).ytil
    S = S + (params.gamma2 * tau) * (ytil - WRW)
    return replace(state, R=R, ytil=ytil, S=S, inner_count=state.inner_count + 1)


def residuals(state_prev: PrsmState, state: PrsmState, params: PrsmParams,
              W: np.ndarray) -> tuple[float, float]:
    """Scaled primal and dual residuals of the latest iteration."""
    WRW = W @ state.R @ W.T
    primal = np.linalg.norm(state.ytil - WRW) / (1.0 + np.linalg.norm(state.ytil))
    dual = params.tau * np.linalg.norm(
        W.T @ (state_prev.ytil - state.ytil) @ W
    ) / (1.0 + np.linalg.norm(state.S))
    return float(primal), float(dual)


def _incidence(g: Graph) -> np.ndarray:
    A = np.zeros((g.n, g.m))
    for k, (u, v) in enumerate(g.edges):
        A[u, k] = 1.0
        A[v, k] = 1.0
    return A


def separate_cuts(ytil: np.ndarray, g: Graph, eps: float = 1e-3,
                  limit: int | None = None, existing=frozenset()) -> list:
    """Scan all (vertex, edge) star inequalities at the current lifted point.

    Returns (i, f, violation) triples with violation > eps, most violated
    first (vertex and edge index break ties), excluding pairs already active;
    `limit` truncates the list.
    """
    m = g.m
    Y = ytil[:m, :m]
    y = np.diagonal(Y)
    viol = y[None, :] - _incidence(g) @ Y.T
    found = []
    for i, f in zip(*np.nonzero(viol > eps)):
        pair = (int(i), int(f))
        if pair not in existing:
            found.append((pair[0], pair[1], float(viol[i, f])))
    found.sort(key=lambda t: (-t[2], t[0], t[1]))
    if limit is not None:
        found = found[:limit]
    return found


def solve_bound(inst: Instance, params: PrsmParams | None = None) -> BoundResult:
    """Run the full bounding loop on an instance.

    Each outer round solves the current relaxation to the residual tolerance,
    converts the dual into a safe lower bound (the reported bounds are running
    maxima, so they only improve), then separates and adds violated star
    inequalities.  Rounds stop on: closed gap against a known upper bound,
    too few new violated cuts, too little bound improvement, the outer round
    limit, the total iteration budget, or the time limit.  lb_dnn is the bound
    after the first round (no cuts); lb_cuts is the final bound.
    """
    g = inst.graph
    n, m = g.n, g.m
    if n < 3:
        raise ValueError(f"need n >= 3, got n={n}")
    base = params if params is not None else PrsmParams()
    base.validate()
    rp = replace(
        base,
        tau=base.tau if base.tau is not None else default_penalty(inst.q),
        ncutsmax=base.ncutsmax if base.ncutsmax is not None else m,
    )
    qpad = pad_cost(inst.q)
    W = facial_basis(m, n)
    ytil0 = initial_lifted(n, m)
    state = PrsmState(
        R=W.T @ ytil0 @ W,
        ytil=ytil0,
        S=np.zeros((m + 1, m + 1)),
        clusters=cluster_cuts([], g),
    )
    cuts: set = set()
    cuts_added_total = 0
    log: list[OuterRound] = []
    lb_dnn = None
    time_dnn = None
    termination = None
    prev_best = None
    t0 = time.perf_counter()

    for outer in range(1, rp.noutermax + 1):
        inner_this = 0
        stop = None
        primal = dual = float("nan")
        while True:
            if state.inner_count >= rp.max_total_iters:
                stop = "iter_cap"
                break
            if time.perf_counter() - t0 >= rp.time_limit:
                stop = "time_limit"
                break
            state_prev = state
            state = inner_step(state, rp, qpad, W)
            inner_this += 1
            primal, dual = residuals(state_prev, state, rp, W)
            if max(primal, dual) <= rp.eps_prsm:
                stop = "residual"
                break

        sb = safe_lower_bound(state.S, qpad, W, cuts, g, n)
        best = max(state.best_valid_lb, sb.value)
        state = replace(state, best_valid_lb=best, outer_count=outer)
        elapsed = time.perf_counter() - t0
        if outer == 1:
            lb_dnn = best
            time_dnn = elapsed

        n_found = 0
        n_added = 0
        if stop in ("iter_cap", "time_limit"):
            termination = stop
        elif inst.ub is not None and inst.ub - best <= 1e-6 * max(1.0, abs(inst.ub)):
            termination = "gap_closed"
        elif outer == rp.noutermax:
            termination = "outer_cap"
        else:
            found = separate_cuts(state.ytil, g, eps=rp.cut_violation_eps,
                                  existing=cuts)
            n_found = len(found)
            if n_found < rp.ncutsmin:
                termination = "few_cuts"
            elif prev_best is not None and best - prev_best < rp.epslbimprov:
                termination = "small_improvement"
            else:
                selected = found[:rp.ncutsmax]
                n_added = len(selected)
                cuts |= {(i, f) for i, f, _ in selected}
                cuts_added_total += n_added
                state = replace(state, clusters=cluster_cuts(cuts, g))

        log.append(OuterRound(
            index=outer, valid_lb=sb, inner_iterations=inner_this,
            primal_residual=primal, dual_residual=dual,
            inner_stop=stop, n_violated_found=n_found, n_cuts_added=n_added,
            n_active_cuts=len(cuts), elapsed=elapsed,
        ))
        prev_best = best
        if termination is not None:
            break

    return BoundResult(
        lb_dnn=lb_dnn,
        time_dnn=time_dnn,
        lb_cuts=state.best_valid_lb,
        time_total=time.perf_counter() - t0,
        iterations=state.inner_count,
        cuts_added=cuts_added_total,
        outer_log=tuple(log),
        termination_reason=termination,
    )
