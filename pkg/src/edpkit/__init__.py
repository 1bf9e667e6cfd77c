"""Toolkit for the edge-disjoint paths problem (EDP).

Exact solvers for structurally restricted instances (single feedback
vertex, bounded treewidth plus degree, small fracture modulators of the
demand-augmented graph), exhaustive reference oracles, and generators
that manufacture structurally hard instances.
"""

from edpkit.graph import Multigraph, Matching
from edpkit.instance import (
    EdpInstance,
    TerminalPair,
    MultiDemandInstance,
    PathSet,
    parse_instance,
    write_instance,
    normalize_instance,
    augmented_graph,
    verify_solution,
)

__all__ = [
    "Multigraph",
    "Matching",
    "EdpInstance",
    "TerminalPair",
    "MultiDemandInstance",
    "PathSet",
    "parse_instance",
    "write_instance",
    "normalize_instance",
    "augmented_graph",
    "verify_solution",
]
