"""Multigraph representation and the graph subroutines shared by the solvers.

Vertices are integers 1..n.  Edges are stored in a stable, indexable list so
that parallel edges stay distinguishable; paths elsewhere in the package are
sequences of edge indices for exactly that reason.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import networkx as nx


class Multigraph:
    """An immutable multigraph (undirected by default, optionally directed).

    Parallel edges are permitted; self-loops are rejected.  Instances are
    safe to share between threads: all state is fixed at construction.
    """

    __slots__ = ("n", "edges", "directed", "_incident")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], directed: bool = False):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        edge_list = tuple((int(u), int(v)) for u, v in edges)
        for u, v in edge_list:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"vertex id out of range: ({u}, {v}) with n={n}")
            if u == v:
                raise ValueError(f"self-loop rejected: ({u}, {v})")
        self.n = n
        self.edges = edge_list
        self.directed = directed
        incident: list[list[int]] = [[] for _ in range(n + 1)]
        for idx, (u, v) in enumerate(edge_list):
            incident[u].append(idx)
            if v != u:
                incident[v].append(idx)
        self._incident = [tuple(ix) for ix in incident]

    @property
    def m(self) -> int:
        return len(self.edges)

    def incident(self, v: int) -> tuple[int, ...]:
        """Edge indices touching v (both directions if directed)."""
        return self._incident[v]

    def other_end(self, edge_index: int, v: int) -> int:
        u, w = self.edges[edge_index]
        if v == u:
            return w
        if v == w:
            return u
        raise ValueError(f"edge {edge_index} not incident to vertex {v}")

    def degree(self, v: int) -> int:
        return len(self._incident[v])

    def out_degree(self, v: int) -> int:
        return sum(1 for e in self._incident[v] if self.edges[e][0] == v)

    def in_degree(self, v: int) -> int:
        return sum(1 for e in self._incident[v] if self.edges[e][1] == v)

    def max_degree(self) -> int:
        return max((len(self._incident[v]) for v in range(1, self.n + 1)), default=0)

    def without_vertices(self, removed: Iterable[int]) -> "Multigraph":
        """Subgraph on the remaining vertices, keeping original vertex ids.

        Removed vertices stay as isolated placeholders so edge endpoints and
        ids remain comparable with the original graph.
        """
        gone = set(removed)
        kept = [e for e in self.edges if e[0] not in gone and e[1] not in gone]
        return Multigraph(self.n, kept, self.directed)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return (self.n, self.edges, self.directed) == (other.n, other.edges, other.directed)

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.directed))

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Multigraph(n={self.n}, m={self.m}, {kind})"


@dataclass(frozen=True)
class Matching:
    """A set of edge indices, no two sharing an endpoint."""

    pairs: frozenset[int]

    def vertices(self, g: Multigraph) -> set[int]:
        covered: set[int] = set()
        for e in self.pairs:
            u, v = g.edges[e]
            covered.add(u)
            covered.add(v)
        return covered

    def weight(self, w: Callable[[int], int] | Sequence[int]) -> int:
        if callable(w):
            return sum(w(e) for e in self.pairs)
        return sum(w[e] for e in self.pairs)


def connected_components(g: Multigraph) -> list[set[int]]:
    """Partition of 1..n into maximal connected vertex sets.

    Edge direction is ignored.  Components are ordered by their smallest
    vertex id.
    """
    seen = [False] * (g.n + 1)
    comps: list[set[int]] = []
    for start in range(1, g.n + 1):
        if seen[start]:
            continue
        comp = {start}
        seen[start] = True
        stack = [start]
        while stack:
            v = stack.pop()
            for e in g.incident(v):
                w = g.other_end(e, v)
                if not seen[w]:
                    seen[w] = True
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def components_excluding(g: Multigraph, removed: Iterable[int]) -> list[set[int]]:
    """Connected components of g minus a vertex set, removed vertices omitted."""
    gone = set(removed)
    sub = g.without_vertices(gone)
    return [c for c in connected_components(sub) if not c <= gone]


def is_forest(g: Multigraph) -> bool:
    """True iff g has no cycle; a pair of parallel edges counts as a cycle."""
    if g.directed:
        raise ValueError("is_forest is defined for undirected graphs")
    parent = list(range(g.n + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


@dataclass(frozen=True)
class FvsOneResult:
    """Outcome of the single-feedback-vertex search.

    ``vertex`` is a vertex whose removal leaves a forest, or None.  When it
    is None, ``already_forest`` distinguishes an acyclic input from a graph
    that needs at least two deletions.
    """

    vertex: int | None
    already_forest: bool

    @property
    def found(self) -> bool:
        return self.vertex is not None or self.already_forest


def find_fvs_one(g: Multigraph) -> FvsOneResult:
    """Find one vertex whose deletion makes g a forest, if such exists.

    Any such vertex must lie on every cycle, so candidates are restricted to
    one concrete cycle; the lowest feasible id on that cycle is returned.
    """
    cycle = _find_cycle(g)
    if cycle is None:
        return FvsOneResult(vertex=None, already_forest=True)
    for v in sorted(cycle):
        if is_forest(g.without_vertices([v])):
            return FvsOneResult(vertex=v, already_forest=False)
    return FvsOneResult(vertex=None, already_forest=False)


def _find_cycle(g: Multigraph) -> set[int] | None:
    """Vertex set of some cycle of g, or None if acyclic (multigraph-aware)."""
    color = [0] * (g.n + 1)
    parent_edge = [-1] * (g.n + 1)
    parent = [0] * (g.n + 1)
    for start in range(1, g.n + 1):
        if color[start]:
            continue
        color[start] = 1
        stack = [(start, iter(g.incident(start)))]
        while stack:
            v, it = stack[-1]
            advanced = False
            for e in it:
                if e == parent_edge[v]:
                    # A parallel edge back to the parent is a real cycle and
                    # is caught below because only one index is excluded.
                    continue
                w = g.other_end(e, v)
                if color[w]:
                    # Back edge: walk v up to w along tree parents.
                    cyc = {w, v}
                    a = v
                    while a != w:
                        a = parent[a]
                        cyc.add(a)
                    return cyc
                color[w] = 1
                parent[w] = v
                parent_edge[w] = e
                stack.append((w, iter(g.incident(w))))
                advanced = True
                break
            if not advanced:
                stack.pop()
    return None


def max_weight_matching(g: Multigraph, weights: Sequence[int] | Callable[[int], int]) -> Matching:
    """Maximum-weight matching over the edge set, returned as edge indices.

    Weights are per edge index and must be non-negative.  Parallel edges are
    collapsed to their best representative (highest weight, then lowest
    index) before delegating to the blossom implementation in networkx.
    Ties between optimal matchings are broken deterministically by the
    sorted construction order below.
    """
    if g.directed:
        raise ValueError("matching is defined for undirected graphs")
    wfun = weights if callable(weights) else weights.__getitem__
    best: dict[tuple[int, int], tuple[int, int]] = {}
    for idx, (u, v) in enumerate(g.edges):
        key = (u, v) if u < v else (v, u)
        w = wfun(idx)
        if w < 0:
            raise ValueError("matching weights must be non-negative")
        cur = best.get(key)
        if cur is None or w > cur[0]:
            best[key] = (w, idx)
    h = nx.Graph()
    h.add_nodes_from(range(1, g.n + 1))
    for (u, v), (w, idx) in sorted(best.items()):
        h.add_edge(u, v, weight=w, index=idx)
    mate = nx.max_weight_matching(h, maxcardinality=False, weight="weight")
    chosen = frozenset(h.edges[u, v]["index"] for u, v in mate)
    return Matching(pairs=chosen)


def matching_max_cover(g: Multigraph, s: set[int] | frozenset[int]) -> Matching:
    """Matching maximizing the number of covered vertices from s.

    Realized as a maximum-weight matching where an edge weighs one per
    endpoint inside s.
    """

    def weight(e: int) -> int:
        u, v = g.edges[e]
        return (u in s) + (v in s)

    return max_weight_matching(g, weight)
