"""Tree decompositions: exact construction for small graphs, min-fill
heuristic beyond, and conversion to nice decompositions.

The exact search runs a subset dynamic program over elimination orders
(feasible up to a dozen vertices) and is the only mode allowed to refuse
with "width exceeds the target"; the heuristic never refuses but may
overshoot the optimum.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache

from edpkit.graph import Multigraph

EXACT_LIMIT = 12


@dataclass
class TreeDecomposition:
    """Bags indexed 0..len-1; parent[i] == -1 marks the root."""

    bags: list[frozenset[int]]
    parent: list[int]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p >= 0:
                out[p].append(i)
        return out

    def validate(self, g: Multigraph) -> None:
        roots = [i for i, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise ValueError("decomposition tree must have exactly one root")
        placed: dict[int, list[int]] = {}
        for i, bag in enumerate(self.bags):
            for v in bag:
                placed.setdefault(v, []).append(i)
        for v in range(1, g.n + 1):
            nodes = placed.get(v)
            if not nodes:
                raise ValueError(f"vertex {v} appears in no bag")
            # Connectivity of the occurrence set, checked by walking up.
            node_set = set(nodes)
            seen = {nodes[0]}
            grew = True
            while grew:
                grew = False
                for i in list(node_set - seen):
                    if self.parent[i] in seen or any(
                        self.parent[j] == i for j in seen
                    ):
                        seen.add(i)
                        grew = True
            if seen != node_set:
                raise ValueError(f"occurrences of vertex {v} are not connected")
        for u, v in g.edges:
            if not any(u in bag and v in bag for bag in self.bags):
                raise ValueError(f"edge ({u}, {v}) is in no bag")


class WidthExceeded(Exception):
    """Raised only when an exact search has proven tw(g) > k."""


def build_tree_decomposition(g: Multigraph, k: int | None = None) -> TreeDecomposition:
    """A valid tree decomposition of g.

    For graphs with at most EXACT_LIMIT vertices the width is optimal and,
    when a target k is given, WidthExceeded is raised iff tw(g) > k.  Larger
    graphs use the min-fill heuristic, which never refuses; its width may
    exceed the optimum (and the 5k+4 contract bound), but the decomposition
    itself is always valid.
    """
    if g.directed:
        raise ValueError("tree decompositions are for undirected graphs")
    if g.n == 0:
        return TreeDecomposition([frozenset()], [-1])
    if g.n <= EXACT_LIMIT:
        order, width = _exact_elimination_order(g)
        if k is not None and width > k:
            raise WidthExceeded(f"treewidth {width} exceeds target {k}")
    else:
        order = _min_fill_order(g)
    return _decomposition_from_order(g, order)


def _neighbor_masks(g: Multigraph) -> list[int]:
    masks = [0] * (g.n + 1)
    for u, v in g.edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def _exact_elimination_order(g: Multigraph) -> tuple[list[int], int]:
    """Optimal elimination order via dynamic programming over subsets.

    State: set S of already-eliminated vertices; eliminating v next costs
    |reachable-through-S neighbors of v outside S|.  The treewidth is the
    minimax cost over orders.
    """
    n = g.n
    masks = _neighbor_masks(g)
    full = (1 << (n + 1)) - 2  # bits 1..n

    @lru_cache(maxsize=None)
    def boundary(v: int, eliminated: int) -> int:
        # Vertices outside `eliminated` reachable from v through eliminated.
        seen = 1 << v
        stack = [v]
        out = 0
        while stack:
            a = stack.pop()
            fresh = masks[a] & ~seen
            seen |= fresh
            rest = fresh
            while rest:
                b = rest & -rest
                rest ^= b
                w = b.bit_length() - 1
                if (1 << w) & eliminated:
                    stack.append(w)
                else:
                    out |= b
        return out

    INF = n + 1
    cost = {0: 0}
    choice: dict[int, int] = {}
    by_popcount: list[list[int]] = [[] for _ in range(n + 1)]
    for s in range(1 << n):
        mask = s << 1
        by_popcount[bin(s).count("1")].append(mask)
    for size in range(n):
        for mask in by_popcount[size]:
            if mask not in cost:
                continue
            base = cost[mask]
            rest = full & ~mask
            while rest:
                b = rest & -rest
                rest ^= b
                v = b.bit_length() - 1
                deg = bin(boundary(v, mask)).count("1")
                new_cost = max(base, deg)
                nxt = mask | b
                if new_cost < cost.get(nxt, INF):
                    cost[nxt] = new_cost
                    choice[nxt] = v
    order_rev = []
    mask = full
    while mask:
        v = choice[mask]
        order_rev.append(v)
        mask &= ~(1 << v)
    order = list(reversed(order_rev))
    boundary.cache_clear()
    return order, cost[full]


def _min_fill_order(g: Multigraph) -> list[int]:
    adj: dict[int, set[int]] = {v: set() for v in range(1, g.n + 1)}
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    order = []
    remaining = set(range(1, g.n + 1))
    while remaining:
        best_v, best_fill = -1, None
        for v in sorted(remaining):
            nb = adj[v]
            fill = 0
            nb_list = sorted(nb)
            for i, a in enumerate(nb_list):
                for b in nb_list[i + 1 :]:
                    if b not in adj[a]:
                        fill += 1
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
        nb_list = sorted(adj[best_v])
        for i, a in enumerate(nb_list):
            for b in nb_list[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
        for a in nb_list:
            adj[a].discard(best_v)
        del adj[best_v]
        remaining.discard(best_v)
        order.append(best_v)
    return order


def _decomposition_from_order(g: Multigraph, order: list[int]) -> TreeDecomposition:
    """Standard bag construction: bag(v) = {v} + later neighbors in the
    fill-in graph; v's node hangs off the node of its earliest later bag
    member."""
    n = g.n
    pos = {v: i for i, v in enumerate(order)}
    adj: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    bags: list[frozenset[int]] = [frozenset()] * n
    for i, v in enumerate(order):
        later = {w for w in adj[v] if pos[w] > i}
        bags[i] = frozenset({v} | later)
        later_list = sorted(later)
        for a_i, a in enumerate(later_list):
            for b in later_list[a_i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)
    parent = [-1] * n
    for i, v in enumerate(order):
        rest = [pos[w] for w in bags[i] if w != v]
        if rest:
            parent[i] = min(rest)
    # Tie disconnected pieces under the last node to keep one tree.
    root = n - 1
    for i in range(n - 1):
        if parent[i] < 0:
            parent[i] = root
    return TreeDecomposition(list(bags), parent)


@dataclass
class NiceNode:
    kind: str  # "leaf" | "introduce" | "forget" | "join"
    bag: frozenset[int]
    children: tuple[int, ...]
    vertex: int | None = None  # introduced or forgotten vertex


@dataclass
class NiceTreeDecomposition:
    """Rooted at index len(nodes)-1 with an empty root bag; children precede
    parents, so iterating nodes in index order is bottom-up."""

    nodes: list[NiceNode]

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    @property
    def width(self) -> int:
        return max((len(nd.bag) for nd in self.nodes), default=1) - 1

    def validate(self, g: Multigraph) -> None:
        td = TreeDecomposition(
            [nd.bag for nd in self.nodes],
            self._parents(),
        )
        td.validate(g)
        for i, nd in enumerate(self.nodes):
            if nd.kind == "leaf":
                if nd.children or len(nd.bag) != 1:
                    raise ValueError(f"bad leaf node {i}")
            elif nd.kind == "join":
                a, b = nd.children
                if self.nodes[a].bag != nd.bag or self.nodes[b].bag != nd.bag:
                    raise ValueError(f"join node {i} children bags differ")
            elif nd.kind == "introduce":
                (c,) = nd.children
                if nd.bag != self.nodes[c].bag | {nd.vertex}:
                    raise ValueError(f"bad introduce node {i}")
            elif nd.kind == "forget":
                (c,) = nd.children
                if nd.bag != self.nodes[c].bag - {nd.vertex}:
                    raise ValueError(f"bad forget node {i}")
            else:
                raise ValueError(f"unknown node kind {nd.kind}")
        if self.nodes[self.root].bag:
            raise ValueError("root bag must be empty")

    def _parents(self) -> list[int]:
        parent = [-1] * len(self.nodes)
        for i, nd in enumerate(self.nodes):
            for c in nd.children:
                parent[c] = i
        return parent


def make_nice(td: TreeDecomposition) -> NiceTreeDecomposition:
    """Nice decomposition of the same width: leaf bags of size one,
    introduce/forget chains between differing bags, binary joins with equal
    bags, and a forget chain up to an empty root bag."""
    nodes: list[NiceNode] = []

    def emit(kind: str, bag: frozenset[int], children: tuple[int, ...], vertex: int | None = None) -> int:
        nodes.append(NiceNode(kind, bag, children, vertex))
        return len(nodes) - 1

    def chain_to(bag_from: frozenset[int], bag_to: frozenset[int], below: int) -> int:
        cur, idx = bag_from, below
        for v in sorted(bag_from - bag_to):
            cur = cur - {v}
            idx = emit("forget", cur, (idx,), v)
        for v in sorted(bag_to - bag_from):
            cur = cur | {v}
            idx = emit("introduce", cur, (idx,), v)
        return idx

    def start_leaf(bag: frozenset[int]) -> int:
        if not bag:
            # Degenerate: model an empty bag as introduce-free forget of a
            # single throwaway? Not allowed; callers avoid empty leaves.
            raise ValueError("cannot start a nice chain from an empty bag")
        verts = sorted(bag)
        idx = emit("leaf", frozenset({verts[0]}), ())
        cur = {verts[0]}
        for v in verts[1:]:
            cur.add(v)
            idx = emit("introduce", frozenset(cur), (idx,), v)
        return idx

    children = td.children()
    root = next(i for i, p in enumerate(td.parent) if p < 0)

    def build(i: int) -> int:
        bag = td.bags[i]
        kids = children[i]
        if not kids:
            if not bag:
                # An empty original leaf: start anywhere and forget again so
                # the chain tops out at the recorded (empty) bag.
                w = _any_vertex(td)
                idx = start_leaf(frozenset({w}))
                return emit("forget", frozenset(), (idx,), w)
            return start_leaf(bag)
        built = []
        for c in kids:
            sub = build(c)
            built.append(chain_to(td.bags[c], bag, sub))
        while len(built) > 1:
            a = built.pop()
            b = built.pop()
            built.append(emit("join", bag, (b, a)))
        return built[0]

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * len(td.bags) + 1000))
    top = build(root)
    top = chain_to(td.bags[root], frozenset(), top)
    return NiceTreeDecomposition(nodes)


def _any_vertex(td: TreeDecomposition) -> int:
    for bag in td.bags:
        if bag:
            return min(bag)
    raise ValueError("decomposition covers no vertices")
