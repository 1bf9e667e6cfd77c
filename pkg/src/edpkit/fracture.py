"""FPT EDP solver parameterized by the fracture number of the augmented graph.

Pipeline: find a fracture modulator X of the augmented graph (every
component of G^P - X has at most |X| vertices), make it terminal-free,
subdivide modulator-internal edges, enumerate for every component the set of
configurations it admits (its signature), and decide with an integer
feasibility program whether one configuration per component can be selected
so that, between every two modulator vertices, the demanded crossings are
covered by the supplied connecting paths.  Feasible selections are turned
back into explicit edge-disjoint paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterator

from edpkit.graph import Multigraph, components_excluding
from edpkit.ilp import IntegerProgram, solve_feasibility
from edpkit.instance import (
    EdpInstance,
    PathSet,
    augmented_graph,
    denormalize_paths,
    normalize_instance,
    shortcut_walk,
    verify_solution,
)
from edpkit.oracle import fracture_modulator_valid


@dataclass(frozen=True)
class FractureModulator:
    vertices: frozenset[int]

    @property
    def k(self) -> int:
        return len(self.vertices)


class NoModulator(Exception):
    """No fracture modulator within the requested size bound exists."""


def _dfs_collect(g: Multigraph, start: int, limit: int, removed: set[int]) -> list[int]:
    """First `limit` vertices of a deterministic DFS inside one component."""
    out = [start]
    seen = {start}
    stack = [start]
    while stack and len(out) < limit:
        v = stack.pop()
        for e in sorted(g.incident(v)):
            w = g.other_end(e, v)
            if w in seen or w in removed:
                continue
            seen.add(w)
            out.append(w)
            stack.append(w)
            if len(out) >= limit:
                break
    return out


def _pad_to_valid(g: Multigraph, x: set[int], forbidden: frozenset[int]) -> set[int]:
    """Grow x with smallest allowed vertices until the component-size test
    of the definition holds (components of g - x at most |x| vertices)."""
    x = set(x)
    while not fracture_modulator_valid(g, x):
        candidates = [v for v in range(1, g.n + 1) if v not in x and v not in forbidden]
        if not candidates:
            raise NoModulator("cannot pad modulator to validity")
        x.add(candidates[0])
    return x


def find_fracture_modulator(
    g: Multigraph,
    k: int,
    mode: str = "exact",
    forbidden: frozenset[int] = frozenset(),
) -> FractureModulator | None:
    """A fracture modulator of g, or None when none of size <= k exists.

    exact: branching on a connected set of k+1 vertices of any oversized
    component (every modulator must hit it); the verdict None is exact.
    approx: deletes the whole collected set instead of branching; output
    size is at most (k+1)k and None is only returned when no modulator of
    size <= k exists.  `forbidden` vertices are never picked (used for
    terminal avoidance); with a nonempty forbidden set, None only means no
    *avoiding* modulator was found.
    """
    if mode not in ("exact", "approx"):
        raise ValueError(f"unknown mode: {mode}")
    cap = k

    def oversized(removed: set[int]) -> list[set[int]]:
        return sorted(
            (c for c in components_excluding(g, removed) if len(c) > cap),
            key=min,
        )

    if mode == "exact":

        def search(removed: set[int], budget: int) -> set[int] | None:
            comps = oversized(removed)
            if not comps:
                return set()
            if budget <= 0:
                return None
            comp = comps[0]
            region = _dfs_collect(g, min(comp), cap + 1, removed)
            for v in sorted(region):
                if v in forbidden:
                    continue
                sub = search(removed | {v}, budget - 1)
                if sub is not None:
                    return {v} | sub
            return None

        found = search(set(), k)
    else:
        removed: set[int] = set()
        levels = k
        while True:
            comps = oversized(removed)
            if not comps:
                found = set(removed)
                break
            if levels <= 0:
                found = None
                break
            region = [v for v in _dfs_collect(g, min(comps[0]), cap + 1, removed)]
            if any(v in forbidden for v in region):
                # The walk may not delete forbidden vertices; fall back to
                # deleting the allowed part (still hits any avoiding
                # modulator of the component).
                region = [v for v in region if v not in forbidden]
                if not region:
                    found = None
                    break
            removed.update(region)
            levels -= 1
    if found is None:
        return None
    try:
        return FractureModulator(frozenset(_pad_to_valid(g, found, forbidden)))
    except NoModulator:
        if forbidden:
            return None  # avoiding modulator provably needs forbidden vertices
        raise


def terminal_free_modulator(inst: EdpInstance, x0: FractureModulator) -> FractureModulator:
    """Replace every terminal in the modulator by the graph-neighbors of its
    pair; the pair then sits in its own two-vertex component.  The result
    avoids all terminals and has at most twice the input size (plus padding
    to the definition's component-size test where the exchange alone falls
    short)."""
    if not inst.normalized:
        raise ValueError("terminal_free_modulator expects a normalized instance")
    terminals = inst.terminals
    affected = [p for p in inst.pairs if x0.vertices & set(p.members())]
    x = set(x0.vertices) - terminals
    for p in affected:
        for a in p.members():
            (edge,) = inst.g.incident(a)  # normalized: terminals have degree 1
            x.add(inst.g.other_end(edge, a))
    aug = augmented_graph(inst)
    x = _pad_to_valid(aug, x, frozenset(terminals))
    result = FractureModulator(frozenset(x))
    assert not (result.vertices & terminals)
    return result


def buffer_terminals(inst: EdpInstance) -> tuple[EdpInstance, tuple[int, ...]]:
    """Subdivide every terminal's unique edge, giving each terminal a
    dedicated non-terminal neighbor.  Answer-preserving; returns the new
    instance and a map from new edge indices to source edge indices.

    Rescue step for degenerate instances where so few non-terminal vertices
    exist that no terminal-free fracture modulator can be valid."""
    if not inst.normalized:
        raise ValueError("buffer_terminals expects a normalized instance")
    g = inst.g
    terminals = inst.terminals
    new_edges: list[tuple[int, int]] = []
    edge_map: list[int] = []
    next_id = g.n
    for idx, (u, v) in enumerate(g.edges):
        if u in terminals or v in terminals:
            term, other = (u, v) if u in terminals else (v, u)
            next_id += 1
            new_edges.append((term, next_id))
            edge_map.append(idx)
            new_edges.append((next_id, other))
            edge_map.append(idx)
        else:
            new_edges.append((u, v))
            edge_map.append(idx)
    out = EdpInstance(Multigraph(next_id, new_edges), inst.pairs)
    assert out.normalized
    return out, tuple(edge_map)


def prepare_fracture(
    inst: EdpInstance, x: FractureModulator
) -> tuple[EdpInstance, FractureModulator, tuple[int, ...]]:
    """Subdivide every graph edge with both endpoints in the modulator, so
    the modulator becomes independent in the graph.  Returns the rewritten
    instance, the unchanged modulator, and a map from new edge indices to
    the source edge index (subdivision halves share their source)."""
    g = inst.g
    mod = x.vertices
    new_edges: list[tuple[int, int]] = []
    edge_map: list[int] = []
    next_id = g.n
    for idx, (u, v) in enumerate(g.edges):
        if u in mod and v in mod:
            next_id += 1
            new_edges.append((u, next_id))
            edge_map.append(idx)
            new_edges.append((next_id, v))
            edge_map.append(idx)
        else:
            new_edges.append((u, v))
            edge_map.append(idx)
    out = EdpInstance(Multigraph(next_id, new_edges), inst.pairs)
    assert out.normalized
    return out, x, tuple(edge_map)


# A trace is a tuple of distinct modulator vertices, length >= 2, stored in
# canonical orientation (lexicographically smaller of the two directions).
Trace = tuple[int, ...]
Config = tuple[tuple[Trace, ...], tuple[tuple[tuple[int, int], int], ...]]


def canonical_trace(seq: tuple[int, ...]) -> Trace:
    rev = tuple(reversed(seq))
    return seq if seq <= rev else rev


@dataclass
class ComponentWitness:
    """One realization of a configuration inside a component."""

    internal: dict[int, tuple[int, ...]]  # pair index -> oriented edges s->t
    halves: dict[int, tuple[tuple[tuple[int, ...], int], tuple[tuple[int, ...], int]]]
    supply: dict[tuple[int, int], list[tuple[int, ...]]]  # (a<b) -> edges a->b
    trace_of: dict[int, tuple[int, ...]]  # pair -> trace from s-anchor to t-anchor


Signature = dict[Config, ComponentWitness]


def _enumerate_path_sets(
    g: Multigraph, edge_ids: list[int], endpoint_ok: set[int]
) -> Iterator[list[tuple[tuple[int, ...], int, int]]]:
    """All sets of pairwise edge-disjoint vertex-simple paths over the given
    edges whose endpoints both lie in endpoint_ok.

    Paths are grown contiguously around their lowest-index edge (one arm at
    a time), so each path set is produced exactly once, already oriented:
    entries are (ordered edge walk, from-vertex, to-vertex)."""
    order = sorted(edge_ids)
    pos = {e: i for i, e in enumerate(order)}
    incident: dict[int, list[int]] = {}
    for e in order:
        u, v = g.edges[e]
        incident.setdefault(u, []).append(e)
        incident.setdefault(v, []).append(e)
    decided = [False] * len(order)
    finished: list[tuple[tuple[int, ...], int, int]] = []

    def skip(i: int) -> int:
        while i < len(order) and decided[i]:
            i += 1
        return i

    def rec(i: int) -> Iterator[list[tuple[tuple[int, ...], int, int]]]:
        i = skip(i)
        if i == len(order):
            yield list(finished)
            return
        e = order[i]
        decided[i] = True
        # Option: edge stays unused.
        yield from rec(i + 1)
        # Option: e anchors a new path (it is the path's lowest edge index).
        u, v = g.edges[e]
        verts = {u, v}
        arm2: list[int] = []
        arm1: list[int] = []

        def finalize(end1: int, end2: int) -> Iterator[list]:
            if end1 not in endpoint_ok or end2 not in endpoint_ok:
                return
            walk = tuple(reversed(arm1)) + (e,) + tuple(arm2)
            finished.append((walk, end1, end2))
            yield from rec(i + 1)
            finished.pop()

        def grow_arm1(end1: int, end2: int) -> Iterator[list]:
            yield from finalize(end1, end2)
            for f in incident.get(end1, ()):
                j = pos[f]
                if decided[j] or j <= i:
                    continue
                w = g.other_end(f, end1)
                if w in verts:
                    continue
                decided[j] = True
                arm1.append(f)
                verts.add(w)
                yield from grow_arm1(w, end2)
                verts.discard(w)
                arm1.pop()
                decided[j] = False

        def grow_arm2(end2: int) -> Iterator[list]:
            yield from grow_arm1(u, end2)
            for f in incident.get(end2, ()):
                j = pos[f]
                if decided[j] or j <= i:
                    continue
                w = g.other_end(f, end2)
                if w in verts:
                    continue
                decided[j] = True
                arm2.append(f)
                verts.add(w)
                yield from grow_arm2(w)
                verts.discard(w)
                arm2.pop()
                decided[j] = False

        yield from grow_arm2(v)
        decided[i] = False

    yield from rec(0)


def component_signature(
    inst: EdpInstance,
    comp: set[int],
    x: FractureModulator,
) -> Signature:
    """The exact set of configurations the component admits, each with one
    stored witness.  Enumerates partitions of the component's incident graph
    edges into paths, keeps those whose paths are pair connections, pair
    half-paths, or modulator-to-modulator supply, and expands every
    admissible trace choice for the half-routed pairs."""
    g = inst.g
    mod = x.vertices
    k = len(mod)
    allowed = comp | mod
    edge_ids = [
        i
        for i, (u, v) in enumerate(g.edges)
        if u in allowed and v in allowed and (u in comp or v in comp)
    ]
    pair_indices = sorted(
        j for j, p in enumerate(inst.pairs) if set(p.members()) & comp
    )
    for j in pair_indices:
        assert set(inst.pairs[j].members()) <= comp, "pair split across components"
    terminals = {inst.pairs[j].s: j for j in pair_indices}
    terminals.update({inst.pairs[j].t: j for j in pair_indices})

    protos: dict[
        tuple[tuple[tuple[int, int, int], ...], tuple[tuple[tuple[int, int], int], ...]],
        tuple[dict[int, tuple[int, ...]], dict, dict],
    ] = {}
    endpoint_ok = set(mod) | set(terminals)
    for path_set in _enumerate_path_sets(g, edge_ids, endpoint_ok):
        internal: dict[int, tuple[int, ...]] = {}
        half_of: dict[int, dict[int, tuple[tuple[int, ...], int]]] = {}
        supply: dict[tuple[int, int], list[tuple[int, ...]]] = {}
        ok = True
        served: set[int] = set()
        for walk, a, b in path_set:
            a_term = a in terminals
            b_term = b in terminals
            if a_term and b_term:
                if terminals[a] != terminals[b] or a in served or b in served:
                    ok = False
                    break
                j = terminals[a]
                p = inst.pairs[j]
                internal[j] = walk if a == p.s else tuple(reversed(walk))
                served.add(a)
                served.add(b)
            elif a_term or b_term:
                term, anchor = (a, b) if a_term else (b, a)
                oriented = walk if a_term else tuple(reversed(walk))
                if term in served:
                    ok = False
                    break
                j = terminals[term]
                half_of.setdefault(j, {})[term] = (oriented, anchor)
                served.add(term)
            else:
                key = (a, b) if a < b else (b, a)
                oriented = walk if a == key[0] else tuple(reversed(walk))
                supply.setdefault(key, []).append(oriented)
        if not ok:
            continue
        routed: list[tuple[int, int, int]] = []  # (pair, s-anchor, t-anchor)
        for j in pair_indices:
            p = inst.pairs[j]
            if j in internal:
                if j in half_of:
                    ok = False
                    break
                continue
            halves = half_of.get(j, {})
            if set(halves) != {p.s, p.t}:
                ok = False
                break
            xa = halves[p.s][1]
            xb = halves[p.t][1]
            if xa == xb:
                ok = False
                break
            routed.append((j, xa, xb))
        if not ok:
            continue
        beta = tuple(sorted((key, len(paths)) for key, paths in supply.items()))
        if any(count > k * k for _, count in beta):
            continue
        if len(routed) > k:
            continue
        proto_key = (tuple(routed), beta)
        if proto_key not in protos:
            protos[proto_key] = (
                internal,
                {j: half_of.get(j, {}) for j in pair_indices},
                supply,
            )

    signature: Signature = {}
    for (routed, beta), (internal, half_of, supply) in sorted(
        protos.items(), key=lambda kv: kv[0]
    ):
        options_per_pair: list[list[tuple[int, ...]]] = []
        for _, xa, xb in routed:
            rest = sorted(mod - {xa, xb})
            opts = []
            for r in range(0, len(rest) + 1):
                for mid in permutations(rest, r):
                    seq = (xa, *mid, xb)
                    if len(seq) <= k:
                        opts.append(seq)
            options_per_pair.append(opts)

        def expand(i: int, chosen: list[tuple[int, ...]]) -> None:
            if i == len(routed):
                alpha = tuple(sorted(canonical_trace(t) for t in chosen))
                config: Config = (alpha, beta)
                if config not in signature:
                    signature[config] = ComponentWitness(
                        internal=dict(internal),
                        halves={
                            j: (half_of[j][inst.pairs[j].s], half_of[j][inst.pairs[j].t])
                            for j, _, _ in routed
                        },
                        supply={key: list(paths) for key, paths in supply.items()},
                        trace_of={j: chosen[idx] for idx, (j, _, _) in enumerate(routed)},
                    )
                return
            for opt in options_per_pair[i]:
                chosen.append(opt)
                expand(i + 1, chosen)
                chosen.pop()

        expand(0, [])
    return signature


def config_demand(config: Config, a: int, b: int) -> int:
    alpha, _ = config
    lo, hi = (a, b) if a < b else (b, a)
    count = 0
    for trace in alpha:
        for u, v in zip(trace, trace[1:]):
            if (min(u, v), max(u, v)) == (lo, hi):
                count += 1
    return count


def config_supply(config: Config, a: int, b: int) -> int:
    _, beta = config
    lo, hi = (a, b) if a < b else (b, a)
    for key, count in beta:
        if key == (lo, hi):
            return count
    return 0


@dataclass
class SelectorProgram:
    """Integer feasibility program choosing one configuration per component."""

    program: IntegerProgram
    variables: list[tuple[str, Config]]  # (signature class key, config)
    class_members: dict[str, list[int]]  # signature class key -> component ids
    class_configs: dict[str, list[Config]]


def signature_class_key(sig: Signature) -> str:
    return repr(sorted(sig.keys()))


def build_selector_program(
    signatures: list[Signature], x: FractureModulator
) -> SelectorProgram:
    """Variables per (signature class, configuration); one equality per
    class fixing the number of components served; one inequality per
    modulator 2-subset bounding demanded crossings by supplied paths."""
    class_members: dict[str, list[int]] = {}
    class_configs: dict[str, list[Config]] = {}
    for cid, sig in enumerate(signatures):
        key = signature_class_key(sig)
        class_members.setdefault(key, []).append(cid)
        class_configs.setdefault(key, sorted(sig.keys()))
    variables: list[tuple[str, Config]] = []
    for key in sorted(class_members):
        for config in class_configs[key]:
            variables.append((key, config))
    lower = tuple(0 for _ in variables)
    upper = tuple(len(class_members[key]) for key, _ in variables)
    eq_rows = []
    for key in sorted(class_members):
        coeffs = tuple(1 if vkey == key else 0 for vkey, _ in variables)
        eq_rows.append((coeffs, len(class_members[key])))
    le_rows = []
    mod = sorted(x.vertices)
    for i, a in enumerate(mod):
        for b in mod[i + 1 :]:
            coeffs = tuple(
                config_demand(cfg, a, b) - config_supply(cfg, a, b)
                for _, cfg in variables
            )
            if any(coeffs):
                le_rows.append((coeffs, 0))
    program = IntegerProgram(lower, upper, tuple(eq_rows), tuple(le_rows))
    return SelectorProgram(program, variables, class_members, class_configs)


@dataclass(frozen=True)
class FractureResult:
    status: str  # "yes" | "no" | "modulator-exceeded"
    paths: PathSet | None = None
    modulator: FractureModulator | None = None

    @property
    def is_yes(self) -> bool:
        return self.status == "yes"


def _terminal_free_for(
    inst: EdpInstance, x0: FractureModulator, approx: bool
) -> FractureModulator | None:
    """Terminal-free modulator for the instance, preferring an equally small
    terminal-avoiding search over the doubling exchange; None when even the
    exchange cannot reach validity."""
    terminals = frozenset(inst.terminals)
    if not (x0.vertices & terminals):
        return x0
    aug = augmented_graph(inst)
    if not approx:
        alt = find_fracture_modulator(aug, x0.k, "exact", forbidden=terminals)
        if alt is not None:
            return alt
    try:
        return terminal_free_modulator(inst, x0)
    except NoModulator:
        return None


def solve_fracture(inst: EdpInstance, kmax: int, approx_modulator: bool = False) -> FractureResult:
    """Decide the instance via the fracture pipeline; on yes return a
    verified PathSet.  Returns status "modulator-exceeded" when no fracture
    modulator of the augmented graph within kmax exists (exact search) or
    none was found (approx mode)."""
    work = normalize_instance(inst)
    aug = augmented_graph(work)

    if approx_modulator:
        x0 = find_fracture_modulator(aug, kmax, "approx")
    else:
        x0 = None
        for k in range(0, kmax + 1):
            x0 = find_fracture_modulator(aug, k, "exact")
            if x0 is not None:
                break
    if x0 is None:
        return FractureResult("modulator-exceeded")

    base = work
    rescue_map: tuple[int, ...] | None = None
    x = _terminal_free_for(base, x0, approx_modulator)
    if x is None:
        # Too few non-terminal vertices for any terminal-free modulator;
        # give every terminal a dedicated buffer neighbor and redo the
        # modulator search on the (equivalent) buffered instance.
        base, rescue_map = buffer_terminals(work)
        baug = augmented_graph(base)
        x0b = None
        for k in range(0, 2 * kmax + 2):
            x0b = find_fracture_modulator(baug, k, "exact")
            if x0b is not None:
                break
        assert x0b is not None, "buffered instance lost its modulator"
        x = _terminal_free_for(base, x0b, approx_modulator)
        assert x is not None, "buffered instance still lacks a terminal-free modulator"

    prep, x, edge_map = prepare_fracture(base, x)
    paug = augmented_graph(prep)
    comps = sorted(components_excluding(paug, x.vertices), key=min)
    signatures = [component_signature(prep, comp, x) for comp in comps]
    selector = build_selector_program(signatures, x)
    assignment = solve_feasibility(selector.program)
    if assignment is None:
        return FractureResult("no", modulator=x)

    # Distribute chosen configurations onto components, lowest id first.
    chosen: dict[int, Config] = {}
    for key in sorted(selector.class_members):
        members = sorted(selector.class_members[key])
        counts = [
            (cfg, assignment[i])
            for i, (vkey, cfg) in enumerate(selector.variables)
            if vkey == key
        ]
        it = iter(members)
        for cfg, count in counts:
            for _ in range(count):
                chosen[next(it)] = cfg

    # Pool the supply paths of every selected witness.
    pools: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    witnesses: dict[int, ComponentWitness] = {}
    for cid in range(len(comps)):
        wit = signatures[cid][chosen[cid]]
        witnesses[cid] = wit
        for key, paths in sorted(wit.supply.items()):
            pools.setdefault(key, []).extend(paths)

    def take_supply(u: int, v: int) -> tuple[int, ...]:
        key = (u, v) if u < v else (v, u)
        assert pools.get(key), f"supply exhausted for {key}"
        path = pools[key].pop(0)
        return path if key[0] == u else tuple(reversed(path))

    walks: dict[int, tuple[int, ...]] = {}
    for cid in range(len(comps)):
        wit = witnesses[cid]
        for j, edges in sorted(wit.internal.items()):
            walks[j] = edges
        for j in sorted(wit.trace_of):
            (s_edges, _), (t_edges, _) = wit.halves[j]
            trace = wit.trace_of[j]
            parts: list[int] = list(s_edges)
            for u, v in zip(trace, trace[1:]):
                parts.extend(take_supply(u, v))
            parts.extend(reversed(t_edges))
            walks[j] = tuple(parts)

    mapped: list[tuple[int, ...]] = []
    for j, p in enumerate(work.pairs):
        raw = walks[j]
        edges: list[int] = []
        for e in raw:
            src = edge_map[e]
            if not edges or edges[-1] != src:
                edges.append(src)
        if rescue_map is not None:
            unbuffered: list[int] = []
            for e in edges:
                src = rescue_map[e]
                if not unbuffered or unbuffered[-1] != src:
                    unbuffered.append(src)
            edges = unbuffered
        mapped.append(shortcut_walk(work.g, tuple(edges), p.s))
    sol = PathSet(tuple(mapped))
    verdict = verify_solution(work, sol)
    assert verdict.ok, f"fracture produced an invalid certificate: {verdict.reason}"
    final = denormalize_paths(inst, sol) if work is not inst else sol
    verdict = verify_solution(inst, final)
    assert verdict.ok, f"fracture certificate broke during denormalization: {verdict.reason}"
    return FractureResult("yes", final, modulator=x)
