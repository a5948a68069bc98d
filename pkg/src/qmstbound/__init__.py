"""Lower bounds for the quadratic minimum spanning tree problem.

The pipeline: generate or read an instance, lift the edge selection into a
doubly nonnegative matrix variable, solve the facially reduced relaxation by
Peaceman-Rachford splitting, tighten with violated star inequalities, and
post-process the duals into bounds that stay valid at any stopping point.
"""

from .graph import Graph, SpectralConstants, spectral_constants
from .instances import Instance, InstanceSpec, generate, read_instance, write_instance
from .solver import BoundResult, PrsmParams, solve_bound
from .bounds import SafeBound, brute_force_qmstp, heuristic_upper_bound, safe_lower_bound

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "SpectralConstants",
    "spectral_constants",
    "Instance",
    "InstanceSpec",
    "generate",
    "read_instance",
    "write_instance",
    "BoundResult",
    "PrsmParams",
    "solve_bound",
    "SafeBound",
    "brute_force_qmstp",
    "heuristic_upper_bound",
    "safe_lower_bound",
]
