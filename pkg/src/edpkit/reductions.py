"""Instance generators realizing the hardness reductions as factories.

The chain goes multicolored clique -> multidimensional subset sum (exact,
then cardinality-bounded, then relaxed) -> directed multi-demand paths ->
Eulerian-balanced directed -> undirected multi-demand -> plain EDP.  A
separate generator builds the bounded-pairs-per-component instances from
three-demand path problems.  Every generator is deterministic, and each
carries structural audits that the tests (and the CLI's meta comments)
check on every produced instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from edpkit.graph import Multigraph, components_excluding, is_forest
from edpkit.instance import (
    EdpInstance,
    MultiDemandInstance,
    TerminalPair,
    augmented_graph,
)


@dataclass(frozen=True)
class MccInstance:
    """k-partite graph; no edge may run inside a part."""

    n: int
    parts: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        part_of: dict[int, int] = {}
        for i, part in enumerate(self.parts):
            for v in part:
                if v in seen:
                    raise ValueError(f"vertex {v} in two parts")
                seen.add(v)
                part_of[v] = i
        if seen != set(range(1, self.n + 1)):
            raise ValueError("parts must partition 1..n")
        for u, v in self.edges:
            if part_of[u] == part_of[v]:
                raise ValueError(f"edge ({u}, {v}) inside part {part_of[u]}")

    @property
    def k(self) -> int:
        return len(self.parts)


@dataclass(frozen=True)
class MssInstance:
    """Multidimensional subset sum: items and target over dimension k.

    cardinality is the k' of the cardinality-bounded variants; `relaxed`
    marks the >=-target / <=-cardinality semantics."""

    dimension: int
    items: tuple[tuple[int, ...], ...]
    target: tuple[int, ...]
    cardinality: int | None = None
    relaxed: bool = False

    def __post_init__(self) -> None:
        for s in self.items:
            if len(s) != self.dimension or any(e < 0 for e in s):
                raise ValueError("item vectors must be non-negative, full-dimension")
        if len(self.target) != self.dimension or any(e < 0 for e in self.target):
            raise ValueError("target must be non-negative, full-dimension")


def sidon_sequence(n: int) -> tuple[int, ...]:
    """n distinct non-negative integers with all pairwise sums distinct.

    Construction: with p the smallest prime >= n, take 2pk + (k^2 mod p)
    for k = 0..n-1; the largest element stays below 8n^2.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    p = _next_prime(n)
    seq = tuple(2 * p * k + (k * k) % p for k in range(n))
    assert max(seq) <= 8 * n * n
    return seq


def _next_prime(n: int) -> int:
    candidate = max(n, 2)
    while True:
        if all(candidate % d for d in range(2, int(candidate**0.5) + 1)):
            return candidate
        candidate += 1


def mcc_to_mss(mcc: MccInstance) -> MssInstance:
    """Encode multicolored-clique existence as exact multidimensional subset
    sum, one item per vertex and per edge.

    The first C(k,2) coordinates force, per part pair, a vertex-sum plus an
    edge complement to hit a fixed total; Sidon values make the edge choice
    commit to its endpoints.  The middle C(k,2) and last k coordinates force
    exactly one edge per part pair and one vertex per part, so any solution
    has exactly k + C(k,2) items (recorded as `cardinality`).
    """
    k = mcc.k
    pair_count = k * (k - 1) // 2
    dim = 2 * pair_count + k
    sidon = sidon_sequence(mcc.n)
    max2 = max(sidon) + (sorted(sidon)[-2] if mcc.n >= 2 else 0)

    pair_index: dict[tuple[int, int], int] = {}
    counter = 0
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            pair_index[(i, j)] = counter  # 0-based position
            counter += 1

    part_of: dict[int, int] = {}
    for i, part in enumerate(mcc.parts, start=1):
        for v in part:
            part_of[v] = i

    items: list[tuple[int, ...]] = []
    for v in range(1, mcc.n + 1):
        vec = [0] * dim
        i = part_of[v]
        for (l, r), idx in pair_index.items():
            if i in (l, r):
                vec[idx] = sidon[v - 1]
        vec[2 * pair_count + i - 1] = 1
        items.append(tuple(vec))
    for u, v in mcc.edges:
        vec = [0] * dim
        i, j = sorted((part_of[u], part_of[v]))
        idx = pair_index[(i, j)]
        vec[idx] = (max2 + 1) - (sidon[u - 1] + sidon[v - 1])
        vec[pair_count + idx] = 1
        items.append(tuple(vec))

    target = tuple(
        max2 + 1 if i < pair_count else 1 for i in range(dim)
    )
    return MssInstance(
        dimension=dim,
        items=tuple(items),
        target=target,
        cardinality=k + pair_count,
    )


def mss_to_mrss(mss: MssInstance) -> MssInstance:
    """Mirror every coordinate so that "exactly k' items summing to t"
    becomes "at most k' items summing to at least the mirrored target".

    Items with a coordinate above the target can never participate in an
    exact solution and are dropped (with the mirrored entry otherwise
    negative).  Targets must be strictly positive in every coordinate: a
    zero coordinate removes the cardinality forcing and the two answers can
    genuinely differ (the pipeline's targets are always positive)."""
    if mss.cardinality is None:
        raise ValueError("mss_to_mrss needs a cardinality-bounded instance")
    if mss.cardinality < 1:
        raise ValueError("cardinality must be positive")
    if any(t < 1 for t in mss.target):
        raise ValueError("mss_to_mrss needs strictly positive targets")
    k = mss.dimension
    kept = []
    for s in mss.items:
        if all(s[i] <= mss.target[i] for i in range(k)):
            kept.append(s)
    items = tuple(
        tuple(list(s) + [mss.target[i] - s[i] for i in range(k)]) for s in kept
    )
    target = tuple(
        list(mss.target) + [(mss.cardinality - 1) * t for t in mss.target]
    )
    return MssInstance(
        dimension=2 * k,
        items=items,
        target=target,
        cardinality=mss.cardinality,
        relaxed=True,
    )


@dataclass(frozen=True)
class MdedpLayout:
    """Vertex bookkeeping of the directed gadget construction."""

    source: int
    sink: int
    dim_sources: tuple[int, ...]
    dim_sinks: tuple[int, ...]
    gadget_of_item: tuple[tuple[int, ...], ...]  # per item, its path vertices


def mrss_to_mdedp(mrss: MssInstance) -> tuple[MultiDemandInstance, MdedpLayout]:
    """One directed path gadget per item with two tap vertices per unit of
    every coordinate; unchosen items are burned by source-to-sink paths and
    each coordinate demands its target in tapped unit hops.

    Edge and demand order are tuned for index-ordered backtracking oracles:
    within a gadget, edges are emitted back-to-front with each exit tap
    ahead of the chain continuation, so a lowest-index-first search walks
    the intended unit hop before any detour; demands whose static tap
    supply already falls short of the target come first (they refute the
    instance fastest), then the burn demand, then the remaining coordinates.
    The burn count is clamped at zero when there are fewer items than the
    cardinality bound; such instances stay unsatisfiable through the
    mirrored coordinates."""
    if not mrss.relaxed or mrss.cardinality is None:
        raise ValueError("mrss_to_mdedp needs a relaxed cardinality instance")
    k = mrss.dimension
    source, sink = 1, 2
    dim_sources = tuple(2 + i for i in range(1, k + 1))
    dim_sinks = tuple(2 + k + i for i in range(1, k + 1))
    next_id = 2 + 2 * k
    gadgets: list[tuple[int, ...]] = []
    for s in mrss.items:
        length = 2 * sum(s) + 2
        gadgets.append(tuple(range(next_id + 1, next_id + length + 1)))
        next_id += length
    edges: list[tuple[int, int]] = []
    for item_idx, s in enumerate(mrss.items):
        path = gadgets[item_idx]
        taps_in: dict[int, int] = {}
        taps_out: dict[int, int] = {}
        prefix = 0
        for i in range(k):
            for unit in range(1, s[i] + 1):
                j_in = 2 * prefix + 2 * unit  # 1-based position in the path
                taps_in[j_in] = i
                taps_out[j_in + 1] = i
            prefix += s[i]
        edges.append((path[-1], sink))
        for j in range(len(path) - 1, 0, -1):
            # Position j's exit tap precedes its forward chain edge, which
            # precedes its entry tap: a lowest-index-first search then walks
            # unit hops and straight runs before considering any detour.
            if j in taps_out:
                edges.append((path[j - 1], dim_sinks[taps_out[j]]))
            edges.append((path[j - 1], path[j]))
            if j in taps_in:
                edges.append((dim_sources[taps_in[j]], path[j - 1]))
        edges.append((source, path[0]))
    supply = [sum(s[i] for s in mrss.items) for i in range(k)]
    deficient = sorted(
        (i for i in range(k) if supply[i] < mrss.target[i]),
        key=lambda i: (supply[i] - mrss.target[i], i),
    )
    healthy = [i for i in range(k) if supply[i] >= mrss.target[i]]
    burn = max(0, len(mrss.items) - mrss.cardinality)
    triples = [(dim_sources[i], dim_sinks[i], mrss.target[i]) for i in deficient]
    triples.append((source, sink, burn))
    triples += [(dim_sources[i], dim_sinks[i], mrss.target[i]) for i in healthy]
    inst = MultiDemandInstance(
        Multigraph(next_id, edges, directed=True), tuple(triples)
    )
    layout = MdedpLayout(source, sink, dim_sources, dim_sinks, tuple(gadgets))
    return inst, layout


def demand_augmented(inst: MultiDemandInstance) -> Multigraph:
    """The directed graph plus n back-arcs sink->source per demand triple."""
    edges = list(inst.g.edges)
    for s, t, n in inst.triples:
        edges.extend((t, s) for _ in range(n))
    return Multigraph(inst.g.n, edges, directed=True)


def eulerize_mdedp(inst: MultiDemandInstance) -> MultiDemandInstance:
    """Balance the demand-augmented graph: a fresh super-source/super-sink
    demand absorbs every vertex's in/out surplus, after which in-degree
    equals out-degree everywhere (answers preserved)."""
    if not inst.g.directed:
        raise ValueError("eulerize_mdedp expects a directed instance")
    aug = demand_augmented(inst)
    alpha: dict[int, int] = {}
    beta: dict[int, int] = {}
    for v in range(1, aug.n + 1):
        out_d = aug.out_degree(v)
        in_d = aug.in_degree(v)
        alpha[v] = max(0, out_d - in_d)
        beta[v] = max(0, in_d - out_d)
    q = sum(alpha.values())
    assert q == sum(beta.values())
    s_star, t_star = inst.g.n + 1, inst.g.n + 2
    edges = list(inst.g.edges)
    for v in range(1, inst.g.n + 1):
        edges.extend((s_star, v) for _ in range(alpha[v]))
    for v in range(1, inst.g.n + 1):
        edges.extend((v, t_star) for _ in range(beta[v]))
    triples = tuple(inst.triples) + ((s_star, t_star, q),)
    return MultiDemandInstance(Multigraph(t_star, edges, directed=True), triples)


def is_demand_balanced(inst: MultiDemandInstance) -> bool:
    aug = demand_augmented(inst)
    return all(
        aug.in_degree(v) == aug.out_degree(v) for v in range(1, aug.n + 1)
    )


def mdedp_to_muedp(inst: MultiDemandInstance) -> MultiDemandInstance:
    """Drop arc directions.  Only valid on acyclic instances whose
    demand-augmented graph is balanced (run eulerize_mdedp first)."""
    if not inst.g.directed:
        raise ValueError("input is already undirected")
    if not is_demand_balanced(inst):
        raise ValueError("instance is not demand-augmented Eulerian; eulerize first")
    if _has_directed_cycle(inst.g):
        raise ValueError("instance must be acyclic")
    return MultiDemandInstance(
        Multigraph(inst.g.n, inst.g.edges, directed=False), inst.triples
    )


def _has_directed_cycle(g: Multigraph) -> bool:
    indeg = [0] * (g.n + 1)
    for _, v in g.edges:
        indeg[v] += 1
    queue = [v for v in range(1, g.n + 1) if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for e in g.incident(v):
            if g.edges[e][0] == v:
                w = g.edges[e][1]
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
    return seen < g.n


def muedp_to_edp(inst: MultiDemandInstance) -> EdpInstance:
    """Expand every (s, t, n) demand into n fresh leaf pairs hanging off s
    and t.  Leaf edges come first in the edge list: an index-ordered search
    arriving at a demand endpoint then tries the leaf exits (which are
    one-step dead ends for every other pair) before wandering deeper."""
    if inst.g.directed:
        raise ValueError("muedp_to_edp expects an undirected instance")
    leaf_edges: list[tuple[int, int]] = []
    pairs: list[TerminalPair] = []
    next_id = inst.g.n
    for s, t, n in inst.triples:
        s_leaves = []
        t_leaves = []
        for _ in range(n):
            next_id += 1
            s_leaves.append(next_id)
            leaf_edges.append((next_id, s))
        for _ in range(n):
            next_id += 1
            t_leaves.append(next_id)
            leaf_edges.append((next_id, t))
        pairs.extend(
            TerminalPair(a, b) for a, b in zip(s_leaves, t_leaves)
        )
    edges = leaf_edges + list(inst.g.edges)
    return EdpInstance(Multigraph(next_id, edges), tuple(pairs))


@dataclass(frozen=True)
class MedpLayout:
    deletion_set: tuple[int, ...]


def medp_to_edp(medp: MultiDemandInstance) -> tuple[EdpInstance, MedpLayout]:
    """Three-demand undirected instance -> EDP whose augmented graph has a
    6-vertex deletion set leaving at most one terminal pair per component.

    Per demand i: a gate vertex pair (one for each side), n_i connector
    vertices joining each side's gate to the original terminal, and n_i
    fresh terminal-leaf pairs hanging off the gates."""
    if medp.g.directed:
        raise ValueError("medp must be undirected")
    if len(medp.triples) != 3:
        raise ValueError("medp_to_edp expects exactly three demand triples")
    edges = list(medp.g.edges)
    next_id = medp.g.n
    gates: list[tuple[int, int]] = []
    for _ in medp.triples:
        s_gate, t_gate = next_id + 1, next_id + 2
        next_id += 2
        gates.append((s_gate, t_gate))
    for (s, t, n), (s_gate, t_gate) in zip(medp.triples, gates):
        for _ in range(n):
            next_id += 1
            edges.append((next_id, s))
            edges.append((next_id, s_gate))
        for _ in range(n):
            next_id += 1
            edges.append((next_id, t))
            edges.append((next_id, t_gate))
    pairs: list[TerminalPair] = []
    for (s, t, n), (s_gate, t_gate) in zip(medp.triples, gates):
        for _ in range(n):
            a, b = next_id + 1, next_id + 2
            next_id += 2
            edges.append((a, s_gate))
            edges.append((b, t_gate))
            pairs.append(TerminalPair(a, b))
    inst = EdpInstance(Multigraph(next_id, edges), tuple(pairs))
    deletion = tuple(v for gate in gates for v in gate)
    return inst, MedpLayout(deletion)


@dataclass
class PipelineResult:
    mcc: MccInstance
    mss: MssInstance
    mrss: MssInstance
    mdedp: MultiDemandInstance
    mdedp_layout: MdedpLayout
    eulerized: MultiDemandInstance
    muedp: MultiDemandInstance
    edp: EdpInstance
    audits: dict[str, bool] = field(default_factory=dict)
    meta: dict[str, str] = field(default_factory=dict)


def full_pipeline(mcc: MccInstance) -> PipelineResult:
    """Compose the whole reduction chain and run the structural audits."""
    mss = mcc_to_mss(mcc)
    mrss = mss_to_mrss(mss)
    mdedp, layout = mrss_to_mdedp(mrss)
    eulerized = eulerize_mdedp(mdedp)
    muedp = mdedp_to_muedp(eulerized)
    edp = muedp_to_edp(muedp)
    result = PipelineResult(mcc, mss, mrss, mdedp, layout, eulerized, muedp, edp)
    result.audits["sidon"] = audit_sidon(mcc.n)
    result.audits["fvs_bound"] = audit_mdedp_fvs(mdedp, layout, 2 * mrss.dimension + 2)
    result.audits["euler_balance"] = is_demand_balanced(eulerized)
    result.meta["n"] = str(edp.g.n)
    result.meta["m"] = str(edp.g.m)
    result.meta["pairs"] = str(len(edp.pairs))
    result.meta["mdedp_fvs_bound"] = str(2 * mrss.dimension + 2)
    return result


def audit_sidon(n: int) -> bool:
    """Pairwise sums of distinct elements all differ and the cap holds."""
    seq = sidon_sequence(n)
    sums = [seq[i] + seq[j] for i in range(n) for j in range(i + 1, n)]
    return len(sums) == len(set(sums)) and max(seq) <= 8 * n * n


def audit_mdedp_fvs(
    inst: MultiDemandInstance, layout: MdedpLayout, bound: int
) -> bool:
    """Witness check: deleting source, sink, and the per-dimension
    endpoints leaves the underlying undirected augmented graph a forest,
    certifying fvs <= 2k + 2."""
    aug_edges = list(inst.g.edges)
    for s, t, _ in inst.triples:
        aug_edges.append((s, t))
    und = Multigraph(inst.g.n, aug_edges, directed=False)
    witness = {layout.source, layout.sink, *layout.dim_sources, *layout.dim_sinks}
    if len(witness) > bound:
        return False
    return is_forest(und.without_vertices(witness))


def audit_medp_components(inst: EdpInstance, layout: MedpLayout) -> bool:
    """Every component of the augmented graph minus the deletion set holds
    at most one terminal pair."""
    aug = augmented_graph(inst)
    comps = components_excluding(aug, set(layout.deletion_set))
    for comp in comps:
        pairs_inside = sum(
            1 for p in inst.pairs if set(p.members()) & comp
        )
        if pairs_inside > 1:
            return False
    return True
