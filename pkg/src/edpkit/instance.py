"""EDP instance model: normalization, augmented graph, text format, verification.

The text format is line oriented (see `parse_instance`).  Pair order is
semantic: solution files refer to pairs by position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from edpkit.graph import Multigraph


@dataclass(frozen=True)
class TerminalPair:
    s: int
    t: int

    def __post_init__(self) -> None:
        if self.s == self.t:
            raise ValueError(f"terminal pair with equal endpoints: {self.s}")

    def members(self) -> tuple[int, int]:
        return (self.s, self.t)


@dataclass(frozen=True)
class EdpInstance:
    """Undirected graph plus ordered terminal pairs.

    ``normalized`` is derived at construction: it is True iff every terminal
    occurs in exactly one pair, has degree exactly one, and no two terminals
    are adjacent.
    """

    g: Multigraph
    pairs: tuple[TerminalPair, ...]
    normalized: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.g.directed:
            raise ValueError("EDP instances are undirected")
        for p in self.pairs:
            for v in p.members():
                if not (1 <= v <= self.g.n):
                    raise ValueError(f"terminal {v} out of range")
        object.__setattr__(self, "normalized", self._check_normalized())

    def _check_normalized(self) -> bool:
        occurrences: dict[int, int] = {}
        for p in self.pairs:
            for v in p.members():
                occurrences[v] = occurrences.get(v, 0) + 1
        terminals = set(occurrences)
        for v, count in occurrences.items():
            if count != 1 or self.g.degree(v) != 1:
                return False
        for u, v in self.g.edges:
            if u in terminals and v in terminals:
                return False
        return True

    @property
    def terminals(self) -> set[int]:
        return {v for p in self.pairs for v in p.members()}


@dataclass(frozen=True)
class MultiDemandInstance:
    """Graph (directed or undirected) with (source, sink, multiplicity) triples."""

    g: Multigraph
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        for s, t, n in self.triples:
            if not (1 <= s <= self.g.n and 1 <= t <= self.g.n):
                raise ValueError(f"demand endpoint out of range: ({s}, {t})")
            if n < 0:
                raise ValueError("demand multiplicity must be non-negative")


@dataclass(frozen=True)
class PathSet:
    """One path per terminal pair, each a tuple of edge indices."""

    paths: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str | None = None


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_instance(text: str) -> EdpInstance | MultiDemandInstance:
    """Parse the line-oriented instance format.

    Format (ASCII, 1-based vertex ids):
      - comment lines start with "c"
      - header: "p edp <n> <m> <p>", or "p mdedp <n> <m> <l>" (directed) /
        "p muedp <n> <m> <l>" for multi-demand instances
      - m edge lines "e <u> <v>" (read as arcs u->v for mdedp)
      - demand lines: "t <a> <b>" for edp, "t <s> <t> <n>" for mdedp/muedp
    """
    kind = ""
    n = m = p = 0
    edges: list[tuple[int, int]] = []
    pairs: list[TerminalPair] = []
    triples: list[tuple[int, int, int]] = []
    header_seen = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "p":
            if header_seen:
                raise ParseError(line_no, "duplicate header")
            if len(fields) != 5 or fields[1] not in ("edp", "mdedp", "muedp"):
                raise ParseError(line_no, f"malformed header: {line!r}")
            kind = fields[1]
            try:
                n, m, p = int(fields[2]), int(fields[3]), int(fields[4])
            except ValueError:
                raise ParseError(line_no, f"malformed header: {line!r}") from None
            if n < 0 or m < 0 or p < 0:
                raise ParseError(line_no, "negative count in header")
            header_seen = True
        elif tag == "e":
            if not header_seen:
                raise ParseError(line_no, "edge line before header")
            if len(fields) != 3:
                raise ParseError(line_no, f"malformed edge line: {line!r}")
            try:
                u, v = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError(line_no, f"malformed edge line: {line!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(line_no, f"vertex id out of range: ({u}, {v})")
            if u == v:
                raise ParseError(line_no, f"self-loop rejected: ({u}, {v})")
            edges.append((u, v))
        elif tag == "t":
            if not header_seen:
                raise ParseError(line_no, "demand line before header")
            want = 3 if kind == "edp" else 4
            if len(fields) != want:
                raise ParseError(line_no, f"malformed demand line: {line!r}")
            try:
                nums = [int(x) for x in fields[1:]]
            except ValueError:
                raise ParseError(line_no, f"malformed demand line: {line!r}") from None
            if not (1 <= nums[0] <= n and 1 <= nums[1] <= n):
                raise ParseError(line_no, f"vertex id out of range: ({nums[0]}, {nums[1]})")
            if kind == "edp":
                if nums[0] == nums[1]:
                    raise ParseError(line_no, "terminal pair with equal endpoints")
                pairs.append(TerminalPair(nums[0], nums[1]))
            else:
                if nums[2] < 0:
                    raise ParseError(line_no, "negative demand multiplicity")
                triples.append((nums[0], nums[1], nums[2]))
        else:
            raise ParseError(line_no, f"unknown line tag: {tag!r}")
    if not header_seen:
        raise ParseError(1, "missing header")
    if len(edges) != m:
        raise ParseError(line_no if text else 1, f"edge count mismatch: header says {m}, found {len(edges)}")
    demands = len(pairs) if kind == "edp" else len(triples)
    if demands != p:
        raise ParseError(line_no if text else 1, f"demand count mismatch: header says {p}, found {demands}")
    if kind == "edp":
        return EdpInstance(Multigraph(n, edges, directed=False), tuple(pairs))
    return MultiDemandInstance(Multigraph(n, edges, directed=(kind == "mdedp")), tuple(triples))


def write_instance(inst: EdpInstance | MultiDemandInstance) -> str:
    """Serialize an instance; `parse_instance` round-trips it exactly."""
    lines: list[str] = []
    g = inst.g
    if isinstance(inst, EdpInstance):
        lines.append(f"p edp {g.n} {g.m} {len(inst.pairs)}")
        lines.extend(f"e {u} {v}" for u, v in g.edges)
        lines.extend(f"t {p.s} {p.t}" for p in inst.pairs)
    else:
        kind = "mdedp" if g.directed else "muedp"
        lines.append(f"p {kind} {g.n} {g.m} {len(inst.triples)}")
        lines.extend(f"e {u} {v}" for u, v in g.edges)
        lines.extend(f"t {s} {t} {n}" for s, t, n in inst.triples)
    return "\n".join(lines) + "\n"


def normalize_instance(inst: EdpInstance) -> EdpInstance:
    """Rewrite the instance so the standing terminal assumptions hold.

    Every terminal occurrence violating an assumption (occurs in more than
    one pair, degree differing from one, or adjacent to another terminal)
    is replaced by a fresh leaf attached to it.  Fresh leaves get ids
    n+1, n+2, ... in pair order, s before t.  The yes/no answer is
    preserved, and the operation is idempotent.
    """
    if inst.normalized:
        return inst
    g = inst.g
    occurrences: dict[int, int] = {}
    for p in inst.pairs:
        for v in p.members():
            occurrences[v] = occurrences.get(v, 0) + 1
    terminals = set(occurrences)
    adjacent_to_terminal: set[int] = set()
    for u, v in g.edges:
        if u in terminals and v in terminals:
            adjacent_to_terminal.add(u)
            adjacent_to_terminal.add(v)

    def violates(v: int) -> bool:
        return occurrences[v] != 1 or g.degree(v) != 1 or v in adjacent_to_terminal

    new_edges = list(g.edges)
    new_pairs: list[TerminalPair] = []
    next_id = g.n
    for p in inst.pairs:
        ends = []
        for v in p.members():
            if violates(v):
                next_id += 1
                new_edges.append((v, next_id))
                ends.append(next_id)
            else:
                ends.append(v)
        new_pairs.append(TerminalPair(ends[0], ends[1]))
    result = EdpInstance(Multigraph(next_id, new_edges, directed=False), tuple(new_pairs))
    assert result.normalized, "normalization must reach a fixed point in one pass"
    return result


def denormalize_paths(original: EdpInstance, sol: PathSet) -> PathSet:
    """Map a solution of normalize_instance(original) back onto original.

    Normalization only appends leaf edges (indices >= original edge count)
    at path ends, so stripping them recovers paths of the original instance.
    """
    m = original.g.m
    stripped = []
    for path in sol.paths:
        core = list(path)
        while core and core[0] >= m:
            core.pop(0)
        while core and core[-1] >= m:
            core.pop()
        stripped.append(tuple(core))
    return PathSet(tuple(stripped))


def augmented_graph(inst: EdpInstance) -> Multigraph:
    """The instance graph with one extra edge per terminal pair, in pair order."""
    edges = list(inst.g.edges)
    edges.extend(p.members() for p in inst.pairs)
    return Multigraph(inst.g.n, edges, directed=False)


def walk_endpoints(g: Multigraph, path: Iterable[int], start: int) -> int | None:
    """Follow edge indices from `start`; return the final vertex or None if
    the sequence is not incident-consecutive."""
    cur = start
    for e in path:
        u, v = g.edges[e]
        if cur == u:
            cur = v
        elif cur == v:
            cur = u
        else:
            return None
    return cur


def verify_solution(inst: EdpInstance, sol: PathSet) -> Verdict:
    """Check a path set: endpoints per pair, consecutive incidence, global
    edge-disjointness.  Edge-simple walks are accepted; the first violated
    condition is reported.
    """
    if len(sol.paths) != len(inst.pairs):
        return Verdict(False, f"expected {len(inst.pairs)} paths, got {len(sol.paths)}")
    used: set[int] = set()
    for i, (pair, path) in enumerate(zip(inst.pairs, sol.paths), start=1):
        for e in path:
            if not (0 <= e < inst.g.m):
                return Verdict(False, f"path {i}: edge index {e} out of range")
        for e in path:
            if e in used:
                return Verdict(False, f"edge reused: {e}")
            used.add(e)
        if not path:
            return Verdict(False, f"path {i}: empty path for pair ({pair.s}, {pair.t})")
        end = walk_endpoints(inst.g, path, pair.s)
        if end is None:
            return Verdict(False, f"path {i}: edges not consecutive")
        if end != pair.t:
            return Verdict(False, f"path {i}: wrong endpoint (reached {end}, wanted {pair.t})")
    return Verdict(True)


def shortcut_walk(g: Multigraph, path: tuple[int, ...], start: int) -> tuple[int, ...]:
    """Shortcut an edge-simple walk to a vertex-simple path with the same
    endpoints, using a subset of its edges."""
    verts = [start]
    cur = start
    for e in path:
        cur = g.other_end(e, cur)
        verts.append(cur)
    edges = list(path)
    changed = True
    while changed:
        changed = False
        seen: dict[int, int] = {}
        for i, v in enumerate(verts):
            if v in seen:
                j = seen[v]
                del verts[j + 1 : i + 1]
                del edges[j:i]
                changed = True
                break
            seen[v] = i
    return tuple(edges)
