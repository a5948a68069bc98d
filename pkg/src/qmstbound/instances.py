"""Benchmark instance generation and the on-disk instance format.

An instance is a connected graph plus a symmetric cost matrix Q indexed by
edge pairs: diagonal entries are linear edge costs, off-diagonal entries are
interaction costs between edge pairs.  Generation is deterministic: the same
(family, n, density, seed) always produces the bit-identical instance because
every random draw happens in a fixed order on one PCG64 stream.

Families
--------
CP1..CP4   uniform integer costs; diagonal/off-diagonal ranges
           (10,10), (10,100), (100,10), (100,100).
OPsym      complete graph, diagonal U{1..100}, interactions U{1..20}.
OPvsym     complete graph, diagonal U{1..10000}, interaction of edges {i,j}
           and {k,l} equal to w(i)w(j)w(k)w(l) for vertex weights w in U{1..10}.
OPesym     complete graph on random plane points in [0,100]^2; diagonal is
           the edge length, interaction the distance between edge midpoints.
SV         10% of edges are designated high-interaction; pair costs are
           uniform in fractions of a configurable maximum: [0.9,1.0] between
           high edges, [0.2,0.4] between high and rest, [0.5,0.7] within the
           rest; diagonal uniform in [0,0.2] of its own maximum.

File format
-----------
    QMST 1
    n m [ub]
    <m lines "i j", 1-based endpoints, defining the edge order>
    <m rows of m cost entries>

Lines starting with '#' are comments and may appear anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph

FAMILIES = ("CP1", "CP2", "CP3", "CP4", "OPsym", "OPvsym", "OPesym", "SV")
DENSITIES = (33, 67, 100)

# (diagonal range, off-diagonal range) for the uniform integer families
_UNIFORM_RANGES = {
    "CP1": (10, 10),
    "CP2": (10, 100),
    "CP3": (100, 10),
    "CP4": (100, 100),
    "OPsym": (100, 20),
}

_MAGIC = "QMST 1"


class InstanceFormatError(ValueError):
    """Raised on malformed instance files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    n: int
    density: int = 100
    seed: int = 0
    cmax_diag: float = 100.0
    cmax_off: float = 100.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.n < 3:
            raise ValueError(f"need n >= 3, got n={self.n}")
        if self.density not in DENSITIES:
            raise ValueError(f"density must be one of {DENSITIES}, got {self.density}")
        if self.family.startswith("OP") and self.density != 100:
            raise ValueError(f"family {self.family} is defined on complete graphs only")
        if self.cmax_diag <= 0 or self.cmax_off <= 0:
            raise ValueError("cost maxima must be positive")


@dataclass
class Instance:
    graph: Graph
    q: np.ndarray
    ub: float | None = None
    spec: InstanceSpec | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        m = self.graph.m
        if self.q.shape != (m, m):
            raise ValueError(f"cost matrix shape {self.q.shape} does not match m={m}")
        if not np.all(np.isfinite(self.q)):
            raise ValueError("cost matrix has non-finite entries")
        if not np.array_equal(self.q, self.q.T):
            raise ValueError("cost matrix is not symmetric")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m


def pad_cost(q: np.ndarray) -> np.ndarray:
    """Embed Q into the lifted space: one extra zero row and column."""
    q = np.asarray(q, dtype=float)
    m = q.shape[0]
    out = np.zeros((m + 1, m + 1))
    out[:m, :m] = q
    return out


def _random_connected_graph(rng: np.random.Generator, n: int, density: int,
                            max_retries: int = 1000) -> Graph:
    if density == 100:
        return Graph.complete(n)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    m_target = round(len(pairs) * density / 100.0)
    if m_target < n - 1:
        raise ValueError(
            f"density {density}% gives {m_target} edges, too few to connect n={n} vertices"
        )
    for _ in range(max_retries):
        idx = rng.choice(len(pairs), size=m_target, replace=False)
        edges = [pairs[i] for i in sorted(idx)]
        g = Graph(n, edges, require_connected=False)
        if g._connected():
            return g
    raise RuntimeError(
        f"no connected graph with n={n}, density={density}% found in {max_retries} draws"
    )


def _pair_indices(m: int) -> tuple[np.ndarray, np.ndarray]:
    # upper triangle in row-major order, matching the draw order of every family
    iu = np.triu_indices(m, k=1)
    return iu


def _fill_symmetric(m: int, diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    q = np.zeros((m, m))
    rows, cols = _pair_indices(m)
    q[rows, cols] = off
    q = q + q.T
    q[np.diag_indices(m)] = diag
    return q


def generate(spec: InstanceSpec) -> Instance:
    """Generate a benchmark instance; deterministic in (family, n, density, seed)."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    extras: dict = {}

    if spec.family == "OPesym":
        coords = rng.uniform(0.0, 100.0, size=(n, 2))
        g = Graph.complete(n)
        mids = np.array([(coords[u] + coords[v]) / 2.0 for u, v in g.edges])
        diag = np.array([np.linalg.norm(coords[u] - coords[v]) for u, v in g.edges])
        dmat = np.linalg.norm(mids[:, None, :] - mids[None, :, :], axis=2)
        q = dmat
        q[np.diag_indices(g.m)] = diag
        extras["coords"] = coords
        return Instance(graph=g, q=q, spec=spec, extras=extras)

    g = _random_connected_graph(rng, n, spec.density)
    m = g.m
    npairs = m * (m - 1) // 2

    if spec.family in _UNIFORM_RANGES:
        hi_diag, hi_off = _UNIFORM_RANGES[spec.family]
        diag = rng.integers(1, hi_diag + 1, size=m).astype(float)
        off = rng.integers(1, hi_off + 1, size=npairs).astype(float)
        q = _fill_symmetric(m, diag, off)
    elif spec.family == "OPvsym":
        w = rng.integers(1, 11, size=n).astype(float)
        diag = rng.integers(1, 10001, size=m).astype(float)
        ew = np.array([w[u] * w[v] for u, v in g.edges])
        q = np.outer(ew, ew)
        q[np.diag_indices(m)] = diag
        extras["vertex_weights"] = w
    elif spec.family == "SV":
        n_high = round(0.1 * m)
        high = np.sort(rng.choice(m, size=n_high, replace=False))
        is_high = np.zeros(m, dtype=bool)
        is_high[high] = True
        rows, cols = _pair_indices(m)
        u01 = rng.uniform(size=npairs)
        band = is_high[rows].astype(int) + is_high[cols].astype(int)
        lo = np.choose(band, [0.5, 0.2, 0.9])
        hi = np.choose(band, [0.7, 0.4, 1.0])
        off = (lo + (hi - lo) * u01) * spec.cmax_off
        diag = rng.uniform(size=m) * 0.2 * spec.cmax_diag
        q = _fill_symmetric(m, diag, off)
        extras["high_edges"] = high
    else:  # pragma: no cover - FAMILIES is closed
        raise AssertionError(spec.family)

    return Instance(graph=g, q=q, spec=spec, extras=extras)


def write_instance(inst: Instance, path) -> None:
    """Write the canonical file format; floats keep full precision for round trips."""
    path = Path(path)
    lines = []
    if inst.spec is not None:
        s = inst.spec
        lines.append(f"# {s.family} n={s.n} d={s.density} seed={s.seed}")
    header = f"{inst.n} {inst.m}"
    if inst.ub is not None:
        header += f" {_fmt(inst.ub)}"
    lines.append(_MAGIC)
    lines.append(header)
    for u, v in inst.graph.edges:
        lines.append(f"{u + 1} {v + 1}")
    for row in inst.q:
        lines.append(" ".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_instance(path) -> Instance:
    """Parse the canonical file format; raises InstanceFormatError with a line number."""
    path = Path(path)
    numbered = [
        (k + 1, line.strip())
        for k, line in enumerate(path.read_text().splitlines())
    ]
    rows = [(k, line) for k, line in numbered if line and not line.startswith("#")]
    if not rows:
        raise InstanceFormatError("empty instance file")
    pos = 0

    def take() -> tuple[int, str]:
        nonlocal pos
        if pos >= len(rows):
            raise InstanceFormatError("unexpected end of file", numbered[-1][0])
        out = rows[pos]
        pos += 1
        return out

    k, magic = take()
    if magic != _MAGIC:
        raise InstanceFormatError(f"expected magic {_MAGIC!r}, got {magic!r}", k)

    k, header = take()
    parts = header.split()
    if len(parts) not in (2, 3):
        raise InstanceFormatError("expected 'n m' or 'n m ub'", k)
    try:
        n, m = int(parts[0]), int(parts[1])
        ub = float(parts[2]) if len(parts) == 3 else None
    except ValueError as exc:
        raise InstanceFormatError(f"bad header: {exc}", k) from None
    if n < 2 or m < n - 1:
        raise InstanceFormatError(f"implausible sizes n={n}, m={m}", k)

    edges = []
    for _ in range(m):
        k, line = take()
        parts = line.split()
        if len(parts) != 2:
            raise InstanceFormatError(f"expected an edge 'i j', got {line!r}", k)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InstanceFormatError(f"bad edge endpoints {line!r}", k) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise InstanceFormatError(f"edge ({u},{v}) out of range for n={n}", k)
        edges.append((u - 1, v - 1))
    try:
        g = Graph(n, edges)
    except ValueError as exc:
        raise InstanceFormatError(str(exc), k) from None

    q = np.zeros((m, m))
    for r in range(m):
        k, line = take()
        parts = line.split()
        if len(parts) != m:
            raise InstanceFormatError(
                f"cost row {r + 1} has {len(parts)} entries, expected {m}", k
            )
        try:
            q[r] = [float(x) for x in parts]
        except ValueError as exc:
            raise InstanceFormatError(f"bad cost entry in row {r + 1}: {exc}", k) from None
    if pos != len(rows):
        raise InstanceFormatError("trailing content after cost matrix", rows[pos][0])
    if not np.array_equal(q, q.T):
        raise InstanceFormatError("cost matrix is not symmetric")
    return Instance(graph=g, q=q, ub=ub)
