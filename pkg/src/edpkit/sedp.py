"""Polynomial-time EDP solver for graphs whose feedback vertex set is one vertex.

The instance is rewritten so that (1) every neighbor of the feedback vertex x
is a leaf of the forest g - x with a single x-edge, (2) x is not a terminal,
and (3) every tree is rooted at a non-terminal vertex without an x-edge.
A bottom-up label computation then decides, per subtree, which connectivity
services it can provide (all local pairs routable; additionally a root-to-x
path; or all but one pair routable with one terminal delivered to the subtree
root), with a maximum-cover matching arbitrating between sibling subtrees.
Yes answers are reconstructed into an explicit edge-disjoint path set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from edpkit.graph import (
    Multigraph,
    components_excluding,
    find_fvs_one,
    is_forest,
    matching_max_cover,
)
from edpkit.instance import (
    EdpInstance,
    PathSet,
    TerminalPair,
    denormalize_paths,
    normalize_instance,
    shortcut_walk,
    verify_solution,
)


@dataclass(frozen=True)
class LabelSet:
    """Connectivity services a subtree can provide to its parent."""

    gamma_empty: bool
    gamma_x: bool
    pair_labels: frozenset[int]

    @property
    def empty(self) -> bool:
        return not (self.gamma_empty or self.gamma_x or self.pair_labels)


EMPTY_LABELS = LabelSet(False, False, frozenset())


@dataclass
class SedpInstance:
    """A prepared instance: rewritten graph, rooted forest of g - x, and the
    bookkeeping needed to translate solutions back to the input instance."""

    inst: EdpInstance
    x: int
    roots: tuple[int, ...]
    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]
    post_order: tuple[int, ...]
    tree_of: dict[int, int]  # vertex -> root of its tree
    x_edge_of: dict[int, int]  # forest leaf -> its unique edge index to x
    pair_of: dict[int, int]  # terminal -> pair index
    edge_origin: tuple[int | None, ...]  # prepared edge -> source edge index

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]


class NotFvsOne(ValueError):
    pass


def prepare_sedp(inst: EdpInstance, x: int) -> SedpInstance:
    """Rewrite (answer-preserving) so the solver's standing assumptions hold.

    Rejects inputs where g - x is not a forest.  The instance must be
    normalized.  New vertices are allocated deterministically: first a leaf
    replacing x as a terminal (if needed), then per-tree root leaves (trees
    ordered by smallest vertex), then one gadget leaf per rewritten x-edge in
    edge-index order.
    """
    g = inst.g
    if not (1 <= x <= g.n):
        raise ValueError(f"feedback vertex {x} out of range")
    if not inst.normalized:
        raise ValueError("prepare_sedp expects a normalized instance")
    if not is_forest(g.without_vertices([x])):
        raise NotFvsOne(f"graph minus vertex {x} is not a forest")

    edges: list[tuple[int, int]] = list(g.edges)
    origin: list[int | None] = list(range(g.m))
    pairs: list[TerminalPair] = list(inst.pairs)
    next_id = g.n

    # (2) x must not be a terminal: a fresh leaf takes its place in P.
    for j, p in enumerate(pairs):
        if x in p.members():
            next_id += 1
            edges.append((next_id, x))
            origin.append(None)
            other = p.t if p.s == x else p.s
            pairs[j] = TerminalPair(next_id, other) if p.s == x else TerminalPair(other, next_id)
            break  # normalized: x occurs in at most one pair

    terminals = {v for p in pairs for v in p.members()}

    def forest_components() -> list[set[int]]:
        helper = Multigraph(next_id, edges, directed=False)
        comps = components_excluding(helper, [x])
        return sorted(comps, key=min)

    # (3) every tree needs a non-terminal root without an x-edge.
    x_adjacent = {u for u, v in edges if v == x} | {v for u, v in edges if u == x}
    chosen_roots: list[int] = []
    for comp in forest_components():
        if len(comp) == 1:
            chosen_roots.append(min(comp))
            continue
        candidates = sorted(v for v in comp if v not in terminals and v not in x_adjacent)
        if candidates:
            chosen_roots.append(candidates[0])
        else:
            # Normalization forbids adjacent terminals, so a multi-vertex
            # tree always has a non-terminal vertex to hang the root off.
            anchor = min(v for v in comp if v not in terminals)
            next_id += 1
            edges.append((anchor, next_id))
            origin.append(None)
            chosen_roots.append(next_id)

    # (1) x-edges may only reach forest leaves, one edge each.  Offending
    # x-edges are re-routed through a fresh leaf: the edge (n, x) becomes
    # (n, l) plus (l, x), both remembering the original edge.
    tree_degree = [0] * (next_id + 1)
    x_edges_at: dict[int, list[int]] = {}
    for idx, (u, v) in enumerate(edges):
        if x in (u, v) and u != v:
            other = v if u == x else u
            x_edges_at.setdefault(other, []).append(idx)
        elif x not in (u, v):
            tree_degree[u] += 1
            tree_degree[v] += 1
    # Multi-vertex tree roots are never x-adjacent by the selection rule
    # above, and a single-vertex tree's root is a forest leaf, so only the
    # degree and multiplicity conditions matter here.
    rerouted: dict[int, int] = {}  # edge index -> gadget leaf id
    for n_vertex in sorted(x_edges_at):
        incident = x_edges_at[n_vertex]
        bad = tree_degree[n_vertex] >= 2 or len(incident) >= 2
        if bad:
            for e in incident:
                next_id += 1
                rerouted[e] = next_id
    if rerouted:
        new_edges: list[tuple[int, int]] = []
        new_origin: list[int | None] = []
        for idx, (u, v) in enumerate(edges):
            if idx in rerouted:
                leaf = rerouted[idx]
                n_vertex = v if u == x else u
                new_edges.append((n_vertex, leaf))
                new_origin.append(origin[idx])
                new_edges.append((leaf, x))
                new_origin.append(origin[idx])
            else:
                new_edges.append((u, v))
                new_origin.append(origin[idx])
        edges, origin = new_edges, new_origin

    prepared_graph = Multigraph(next_id, edges, directed=False)
    prepared = EdpInstance(prepared_graph, tuple(pairs))

    # Rooted forest structures over g - x.
    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {v: [] for v in range(1, next_id + 1) if v != x}
    adj: dict[int, list[int]] = {v: [] for v in range(1, next_id + 1) if v != x}
    x_edge_of: dict[int, int] = {}
    for idx, (u, v) in enumerate(prepared_graph.edges):
        if x in (u, v):
            other = v if u == x else u
            assert other not in x_edge_of, "vertex with several x-edges survived preparation"
            x_edge_of[other] = idx
        else:
            adj[u].append(v)
            adj[v].append(u)
    post_order: list[int] = []
    tree_of: dict[int, int] = {}
    seen = set()
    ordered_roots: list[int] = []
    for comp in sorted(components_excluding(prepared_graph, [x]), key=min):
        root = next(r for r in chosen_roots if r in comp)
        ordered_roots.append(root)
        stack = [root]
        parent[root] = 0
        seen.add(root)
        while stack:
            v = stack.pop()
            post_order.append(v)
            tree_of[v] = root
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    children[v].append(w)
                    stack.append(w)
    post_order.reverse()  # children before parents
    for v in children:
        children[v].sort()

    pair_of = {}
    for j, p in enumerate(prepared.pairs):
        pair_of[p.s] = j
        pair_of[p.t] = j
    for v, cs in children.items():
        if cs and v in x_edge_of:
            raise AssertionError("inner vertex kept an x-edge after preparation")

    return SedpInstance(
        inst=prepared,
        x=x,
        roots=tuple(ordered_roots),
        parent=parent,
        children={v: tuple(cs) for v, cs in children.items()},
        post_order=tuple(post_order),
        tree_of=tree_of,
        x_edge_of=x_edge_of,
        pair_of=pair_of,
        edge_origin=tuple(origin),
    )


@dataclass
class _NodePlan:
    """Partition and matching data reused by the label rules at one node."""

    v_neg: list[int]
    v_x: list[int]
    v_plain: list[int]
    h_vertices: list[int]
    h_edges: list[tuple[int, int]]  # pairs of child vertices
    shared_pair: dict[tuple[int, int], int]  # H-edge -> lowest shared pair


def _node_plan(children: list[int], labels: dict[int, LabelSet]) -> _NodePlan:
    v_neg = [c for c in children if not labels[c].gamma_empty]
    v_x = [c for c in children if labels[c].gamma_x]
    v_plain = [c for c in children if labels[c].gamma_empty and not labels[c].gamma_x]
    h_vertices = v_neg + v_plain
    plain = set(v_plain)
    h_edges: list[tuple[int, int]] = []
    shared: dict[tuple[int, int], int] = {}
    for i, ci in enumerate(h_vertices):
        for cj in h_vertices[i + 1 :]:
            if ci in plain and cj in plain:
                continue
            common = labels[ci].pair_labels & labels[cj].pair_labels
            if common:
                h_edges.append((ci, cj))
                shared[(ci, cj)] = min(common)
    return _NodePlan(v_neg, v_x, v_plain, sorted(h_vertices), h_edges, shared)


def _max_cover(plan: _NodePlan, exclude: int | None) -> tuple[int, list[tuple[int, int]]]:
    """Covered count of v_neg \\ {exclude} by a maximum-cover matching of
    H(t) - exclude, plus the matching itself as child-vertex pairs."""
    edges = [e for e in plan.h_edges if exclude not in e]
    if not edges:
        return 0, []
    verts = [v for v in plan.h_vertices if v != exclude]
    index = {v: i + 1 for i, v in enumerate(verts)}
    h = Multigraph(len(verts), [(index[a], index[b]) for a, b in edges])
    target = {index[v] for v in plan.v_neg if v != exclude}
    matching = matching_max_cover(h, target)
    cover = len(matching.vertices(h) & target)
    pairs = []
    back = {i: v for v, i in index.items()}
    for e in sorted(matching.pairs):
        a, b = h.edges[e]
        u, w = back[a], back[b]
        pairs.append((u, w) if (u, w) in plan.shared_pair else (w, u))
    return cover, pairs


def compute_labels(prep: SedpInstance, t: int, child_labels: dict[int, LabelSet]) -> LabelSet:
    """Label set of the subtree rooted at t from its children's label sets.

    Leaf rule: a non-terminal leaf provides gamma-empty, and gamma-x exactly
    when it has an x-edge; a terminal leaf provides its own pair label, plus
    gamma-empty when it has an x-edge.  Inner rule: the subtree partition
    and the maximum-cover matching on the conflict graph H(t) decide which
    services survive; a pair label additionally needs a child that can
    deliver one of its terminals while the rest remains coverable.
    """
    children = list(prep.children[t])
    if not children:
        pair = prep.pair_of.get(t)
        has_x = t in prep.x_edge_of
        return LabelSet(
            gamma_empty=(pair is None) or has_x,
            gamma_x=(pair is None) and has_x,
            pair_labels=frozenset() if pair is None else frozenset({pair}),
        )
    labels = {c: child_labels[c] for c in children}
    if any(labels[c].empty for c in children):
        return EMPTY_LABELS
    plan = _node_plan(children, labels)
    cover, _ = _max_cover(plan, exclude=None)
    deficiency = len(plan.v_neg) - cover
    gamma_empty = deficiency <= len(plan.v_x)
    gamma_x = deficiency < len(plan.v_x)

    ok_without: dict[int, bool] = {}

    def deliverable_via(ti: int) -> bool:
        if ti not in ok_without:
            cover_i, _ = _max_cover(plan, exclude=ti)
            neg = len(plan.v_neg) - (1 if ti in plan.v_neg else 0)
            avail = len(plan.v_x) - (1 if ti in plan.v_x else 0)
            ok_without[ti] = neg - cover_i <= avail
        return ok_without[ti]

    pair_labels = set()
    for c in children:
        for p in labels[c].pair_labels:
            if p not in pair_labels and deliverable_via(c):
                pair_labels.add(p)
    return LabelSet(gamma_empty, gamma_x, frozenset(pair_labels))


def labels_for_tree(prep: SedpInstance, root: int) -> dict[int, LabelSet]:
    """Bottom-up label sets for every vertex of the tree rooted at root."""
    labels: dict[int, LabelSet] = {}
    for v in prep.post_order:
        if prep.tree_of[v] == root:
            labels[v] = compute_labels(prep, v, labels)
    return labels


def tree_gamma_empty(prep: SedpInstance, root: int) -> bool:
    """Whether the whole tree can route all of its terminal pairs locally."""
    return labels_for_tree(prep, root)[root].gamma_empty


@dataclass
class _Path:
    """A path as an edge-index walk from endpoint a to endpoint b."""

    edges: tuple[int, ...]
    a: int
    b: int

    def reversed(self) -> "_Path":
        return _Path(tuple(reversed(self.edges)), self.b, self.a)


@dataclass
class _Realized:
    paths: list[_Path] = field(default_factory=list)
    special: _Path | None = None  # the path ending at the subtree root, if any


def _tree_edge(g: Multigraph, u: int, v: int) -> int:
    for e in g.incident(u):
        if g.other_end(e, u) == v:
            return e
    raise AssertionError(f"missing tree edge ({u}, {v})")


def _realize_tree(prep: SedpInstance, root: int, labels: dict[int, LabelSet]) -> list[_Path]:
    """Reconstruct an explicit path family witnessing that the tree is
    gamma-empty-connected, following the label rules' constructive steps
    with all arbitrary choices fixed to lowest index."""
    g = prep.inst.g
    modes: dict[int, str | int] = {root: "ge"}
    order: list[int] = []
    stack = [root]
    plans: dict[int, dict] = {}
    while stack:
        t = stack.pop()
        order.append(t)
        mode = modes[t]
        children = list(prep.children[t])
        if not children:
            continue
        child_labels = {c: labels[c] for c in children}
        plan = _node_plan(children, child_labels)
        exclude: int | None = None
        if isinstance(mode, int):
            holders = sorted(c for c in children if mode in child_labels[c].pair_labels)
            exclude = next(
                c
                for c in holders
                if _pair_ok(plan, c)
            )
        cover, matching = _max_cover(plan, exclude)
        matched = {v for e in matching for v in e}
        unmatched_neg = sorted(v for v in plan.v_neg if v not in matched and v != exclude)
        suppliers_pool = sorted(v for v in plan.v_x if v != exclude)
        alpha = dict(zip(unmatched_neg, suppliers_pool))
        used_suppliers = set(alpha.values())
        spare_x = [v for v in suppliers_pool if v not in used_suppliers]
        chosen_xpath: int | None = None
        if mode == "gx":
            chosen_xpath = spare_x[0]
        child_mode: dict[int, str | int] = {}
        if exclude is not None:
            child_mode[exclude] = mode  # deliver this pair upward
        for ci, cj in matching:
            p = plan.shared_pair[(ci, cj)] if (ci, cj) in plan.shared_pair else plan.shared_pair[(cj, ci)]
            child_mode[ci] = p
            child_mode[cj] = p
        for u, supplier in alpha.items():
            child_mode[u] = min(labels[u].pair_labels)
            child_mode[supplier] = "gx"
        if chosen_xpath is not None:
            child_mode[chosen_xpath] = "gx"
        for c in children:
            child_mode.setdefault(c, "ge")
        plans[t] = {
            "matching": matching,
            "alpha": alpha,
            "exclude": exclude,
            "chosen_xpath": chosen_xpath,
            "mode": mode,
        }
        for c in children:
            modes[c] = child_mode[c]
            stack.append(c)

    results: dict[int, _Realized] = {}
    for t in reversed(order):
        mode = modes[t]
        children = list(prep.children[t])
        if not children:
            results[t] = _realize_leaf(prep, t, mode)
            continue
        plan_data = plans[t]
        out = _Realized()
        for c in children:
            sub = results[c]
            out.paths.extend(sub.paths)
        # Join matched deliveries through t.
        for ci, cj in plan_data["matching"]:
            si = results[ci].special
            sj = results[cj].special
            assert si is not None and sj is not None
            edges = si.edges + (_tree_edge(g, ci, t), _tree_edge(g, t, cj)) + sj.reversed().edges
            out.paths.append(_Path(edges, si.a, sj.a))
        # Route unmatched deliveries to x through their supplier.
        for u, supplier in plan_data["alpha"].items():
            su = results[u].special
            sv = results[supplier].special
            assert su is not None and sv is not None
            edges = su.edges + (_tree_edge(g, u, t), _tree_edge(g, t, supplier)) + sv.reversed().edges
            out.paths.append(_Path(edges, su.a, sv.a))
        if plan_data["exclude"] is not None:
            sp = results[plan_data["exclude"]].special
            assert sp is not None
            out.special = _Path(sp.edges + (_tree_edge(g, plan_data["exclude"], t),), sp.a, t)
        if plan_data["chosen_xpath"] is not None:
            sx = results[plan_data["chosen_xpath"]].special
            assert sx is not None
            out.special = _Path(sx.edges + (_tree_edge(g, plan_data["chosen_xpath"], t),), sx.a, t)
        results[t] = out
    return results[root].paths


def _pair_ok(plan: _NodePlan, ti: int) -> bool:
    cover_i, _ = _max_cover(plan, exclude=ti)
    neg = len(plan.v_neg) - (1 if ti in plan.v_neg else 0)
    avail = len(plan.v_x) - (1 if ti in plan.v_x else 0)
    return neg - cover_i <= avail


def _realize_leaf(prep: SedpInstance, leaf: int, mode: str | int) -> _Realized:
    g = prep.inst.g
    pair = prep.pair_of.get(leaf)
    x_edge = prep.x_edge_of.get(leaf)
    out = _Realized()
    if mode == "ge":
        if pair is not None:
            assert x_edge is not None, "terminal leaf without x-edge cannot be gamma-empty"
            out.paths.append(_Path((x_edge,), leaf, prep.x))
        return out
    if mode == "gx":
        assert pair is None and x_edge is not None
        out.special = _Path((x_edge,), prep.x, leaf)
        return out
    assert pair == mode, "leaf asked for a pair it does not hold"
    out.special = _Path((), leaf, leaf)
    return out


@dataclass(frozen=True)
class SedpResult:
    status: str  # "yes" | "no"
    paths: PathSet | None = None

    @property
    def is_yes(self) -> bool:
        return self.status == "yes"


def solve_sedp(inst: EdpInstance, x: int | None = None) -> SedpResult:
    """Decide the instance and, on yes, return a verified solution.

    The instance is normalized internally if needed.  If x is not supplied,
    a single feedback vertex is searched for; inputs whose feedback vertex
    set number exceeds one are rejected with NotFvsOne.
    """
    work = normalize_instance(inst)
    if x is None:
        probe = find_fvs_one(work.g)
        if probe.vertex is not None:
            x = probe.vertex
        elif probe.already_forest:
            x = 1 if work.g.n else None
        else:
            raise NotFvsOne("no single feedback vertex exists")
    if x is None:  # empty graph
        return SedpResult("yes", PathSet(()))

    prep = prepare_sedp(work, x)
    tree_labels: dict[int, LabelSet] = {}
    for root in prep.roots:
        labels = labels_for_tree(prep, root)
        if not labels[root].gamma_empty:
            return SedpResult("no")
        tree_labels.update(labels)

    all_paths: list[_Path] = []
    for root in prep.roots:
        all_paths.extend(_realize_tree(prep, root, tree_labels))
    by_terminal: dict[int, _Path] = {}
    for path in all_paths:
        for end in (path.a, path.b):
            if end in prep.pair_of:
                assert end not in by_terminal, "terminal served by two paths"
                by_terminal[end] = path

    g = prep.inst.g
    prepared_paths: list[tuple[int, ...]] = []
    for p in prep.inst.pairs:
        ps = by_terminal[p.s]
        if p.t in (ps.a, ps.b):
            walk = ps.edges if ps.a == p.s else ps.reversed().edges
        else:
            pt = by_terminal[p.t]
            to_x = ps.edges if ps.a == p.s else ps.reversed().edges
            from_x = pt.reversed().edges if pt.a == p.t else pt.edges
            walk = to_x + from_x
        prepared_paths.append(shortcut_walk(g, tuple(walk), p.s))

    normalized_paths = []
    for walk in prepared_paths:
        mapped: list[int] = []
        for e in walk:
            src = prep.edge_origin[e]
            if src is None:
                continue
            if not mapped or mapped[-1] != src:
                mapped.append(src)
        normalized_paths.append(tuple(mapped))
    sol = PathSet(tuple(normalized_paths))
    verdict = verify_solution(work, sol)
    assert verdict.ok, f"sedp produced an invalid certificate: {verdict.reason}"
    final = denormalize_paths(inst, sol) if work is not inst else sol
    verdict = verify_solution(inst, final)
    assert verdict.ok, f"sedp certificate broke during denormalization: {verdict.reason}"
    return SedpResult("yes", final)
