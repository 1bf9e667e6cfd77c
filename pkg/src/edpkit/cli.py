"""Command-line front end: solve, verify, gen, stats.

Exit codes: 0 yes, 1 no, 2 unknown (budget or width/modulator refusals),
64 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from edpkit.fracture import NoModulator, solve_fracture
from edpkit.graph import Multigraph, find_fvs_one
from edpkit.instance import (
    EdpInstance,
    MultiDemandInstance,
    ParseError,
    PathSet,
    parse_instance,
    verify_solution,
    write_instance,
)
from edpkit.oracle import brute_force_edp, brute_force_multi, exhaustive_fracture_number
from edpkit.reductions import (
    MccInstance,
    audit_medp_components,
    full_pipeline,
    medp_to_edp,
    sidon_sequence,
)
from edpkit.sedp import NotFvsOne, solve_sedp
from edpkit.treedec import WidthExceeded, build_tree_decomposition
from edpkit.twdp import solve_twdp

EXIT_YES = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64


def _write_solution(path: Path, verdict: str, sol: PathSet | None) -> None:
    lines = [f"s {verdict}"]
    if sol is not None:
        for i, p in enumerate(sol.paths, start=1):
            lines.append(f"path {i}: " + " ".join(str(e + 1) for e in p))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def parse_solution(text: str) -> tuple[str, PathSet]:
    verdict = ""
    paths: list[tuple[int, ...]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("s "):
            verdict = line.split()[1]
        elif line.startswith("path "):
            rest = line[len("path ") :]
            head, _, body = rest.partition(":")
            idx = int(head)
            if idx != len(paths) + 1:
                raise ParseError(line_no, f"paths out of order (got {idx})")
            paths.append(tuple(int(tok) - 1 for tok in body.split()))
        else:
            raise ParseError(line_no, f"unknown solution line: {line!r}")
    if verdict not in ("yes", "no"):
        raise ParseError(1, "missing or malformed verdict line")
    return verdict, PathSet(tuple(paths))


def _solve_one(path: Path, args: argparse.Namespace) -> tuple[int, str]:
    try:
        inst = parse_instance(path.read_text(encoding="ascii"))
    except (OSError, ParseError) as exc:
        return EXIT_USAGE, f"{path}: {exc}"
    t0 = time.monotonic()
    engine = args.engine
    verdict = "unknown"
    reason = ""
    sol: PathSet | None = None
    if isinstance(inst, MultiDemandInstance):
        if engine not in ("auto", "brute"):
            return EXIT_USAGE, f"{path}: engine {engine} handles plain EDP instances only"
        result = brute_force_multi(inst, budget=args.budget)
        verdict = result.status if result.status != "budget" else "unknown"
        reason = "budget exceeded" if result.status == "budget" else ""
        engine_used = "brute"
    else:
        engine_used, verdict, reason, sol = _solve_edp(inst, engine, args)
    elapsed = time.monotonic() - t0
    if verdict == "yes" and sol is not None:
        out = Path(args.solution) if args.solution else path.with_suffix(path.suffix + ".sol")
        _write_solution(out, "yes", sol)
        reason = f"solution written to {out}"
    summary = f"{path}: s {verdict} [{engine_used}] {elapsed:.2f}s" + (f" ({reason})" if reason else "")
    code = {"yes": EXIT_YES, "no": EXIT_NO}.get(verdict, EXIT_UNKNOWN)
    return code, summary


def _solve_edp(
    inst: EdpInstance, engine: str, args: argparse.Namespace
) -> tuple[str, str, str, PathSet | None]:
    if engine == "auto":
        probe = find_fvs_one(inst.g)
        if probe.found:
            engine = "sedp"
        else:
            result = solve_fracture(inst, kmax=args.kmax)
            if result.status != "modulator-exceeded":
                return (
                    "fracture",
                    result.status,
                    "",
                    result.paths,
                )
            engine = "twdp"
    if engine == "sedp":
        try:
            r = solve_sedp(inst)
            return "sedp", r.status, "", r.paths
        except NotFvsOne as exc:
            return "sedp", "unknown", str(exc), None
    if engine == "fracture":
        r = solve_fracture(inst, kmax=args.kmax)
        if r.status == "modulator-exceeded":
            return "fracture", "unknown", f"no fracture modulator of size <= {args.kmax}", None
        return "fracture", r.status, "", r.paths
    if engine == "twdp":
        try:
            if args.engine == "auto":
                # Fall back to brute force rather than running the DP on a
                # decomposition too wide to finish in reasonable time.
                td = build_tree_decomposition(inst.g)
                cap = args.width_limit if args.width_limit is not None else 8
                if td.width > cap:
                    b = brute_force_edp(inst, budget=args.budget)
                    verdict = b.status if b.status != "budget" else "unknown"
                    return "brute", verdict, f"width {td.width} over auto cap {cap}", b.paths
                r = solve_twdp(inst, decomposition=td)
            else:
                r = solve_twdp(inst, k=args.width_limit)
            return "twdp", r.status, "", r.paths
        except WidthExceeded as exc:
            return "twdp", "unknown", str(exc), None
    if engine == "brute":
        b = brute_force_edp(inst, budget=args.budget)
        verdict = b.status if b.status != "budget" else "unknown"
        return "brute", verdict, "budget exceeded" if b.status == "budget" else "", b.paths
    raise ValueError(f"unknown engine {engine}")


def _cmd_solve(args: argparse.Namespace) -> int:
    paths = [Path(f) for f in args.files]
    if args.jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda p: _solve_one(p, args), paths))
    else:
        results = [_solve_one(p, args) for p in paths]
    worst = 0
    for code, summary in results:
        print(summary)
        worst = max(worst, code)
    return worst


def _cmd_verify(args: argparse.Namespace) -> int:
    try:
        inst = parse_instance(Path(args.instance).read_text(encoding="ascii"))
        verdict, sol = parse_solution(Path(args.solution).read_text(encoding="ascii"))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not isinstance(inst, EdpInstance):
        print("error: verification targets plain EDP instances", file=sys.stderr)
        return EXIT_USAGE
    if verdict == "no":
        print("s no (nothing to verify)")
        return EXIT_NO
    outcome = verify_solution(inst, sol)
    if outcome.ok:
        print("verified: all paths connect their pairs edge-disjointly")
        return EXIT_YES
    print(f"rejected: {outcome.reason}")
    return EXIT_NO


def _cmd_stats(args: argparse.Namespace) -> int:
    try:
        inst = parse_instance(Path(args.file).read_text(encoding="ascii"))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    g = inst.g
    demands = len(inst.pairs) if isinstance(inst, EdpInstance) else len(inst.triples)
    print(f"n {g.n}")
    print(f"m {g.m}")
    print(f"demands {demands}")
    print(f"max-degree {g.max_degree()}")
    if isinstance(inst, EdpInstance):
        probe = find_fvs_one(g)
        if probe.already_forest:
            print("fvs-one forest")
        elif probe.vertex is not None:
            print(f"fvs-one {probe.vertex}")
        else:
            print("fvs-one none")
        from edpkit.instance import augmented_graph, normalize_instance

        aug = augmented_graph(normalize_instance(inst))
        frac = exhaustive_fracture_number(aug, args.kmax)
        print(f"fracture-number {frac if frac is not None else f'> {args.kmax}'}")
    und = g if not g.directed else Multigraph(g.n, g.edges, directed=False)
    td = build_tree_decomposition(und)
    print(f"decomposition-width {td.width}")
    return EXIT_YES


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.generator == "sidon":
        seq = sidon_sequence(args.n)
        print(" ".join(str(x) for x in seq))
        return EXIT_YES
    if args.generator == "mcc-pipeline":
        try:
            mcc = parse_mcc(Path(args.file).read_text(encoding="ascii"))
        except (OSError, ParseError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        res = full_pipeline(mcc)
        for key, value in sorted(res.meta.items()):
            print(f"c meta {key} {value}")
        for key, value in sorted(res.audits.items()):
            print(f"c meta audit-{key} {'pass' if value else 'FAIL'}")
        sys.stdout.write(write_instance(res.edp))
        return EXIT_YES if all(res.audits.values()) else EXIT_UNKNOWN
    if args.generator == "medp":
        try:
            base = parse_instance(Path(args.file).read_text(encoding="ascii"))
        except (OSError, ParseError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if isinstance(base, EdpInstance) or base.g.directed or len(base.triples) != 3:
            print("error: medp generator expects a muedp file with three triples", file=sys.stderr)
            return EXIT_USAGE
        triples = tuple(
            (s, t, n)
            for (s, t, _), n in zip(base.triples, (args.n1, args.n2, args.n3))
        )
        medp = MultiDemandInstance(base.g, triples)
        inst, layout = medp_to_edp(medp)
        ok = audit_medp_components(inst, layout)
        print(f"c meta deletion-set {' '.join(str(v) for v in layout.deletion_set)}")
        print(f"c meta audit-one-pair-per-component {'pass' if ok else 'FAIL'}")
        sys.stdout.write(write_instance(inst))
        return EXIT_YES if ok else EXIT_UNKNOWN
    print(f"error: unknown generator {args.generator}", file=sys.stderr)
    return EXIT_USAGE


def parse_mcc(text: str) -> MccInstance:
    """Multicolored-clique input: "p mcc <n> <m> <k>", then "v <vertex>
    <part>" lines (1-based parts) and "e <u> <v>" lines."""
    n = m = k = 0
    part_of: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    seen_header = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if len(fields) != 5 or fields[1] != "mcc":
                raise ParseError(line_no, f"malformed header: {line!r}")
            n, m, k = int(fields[2]), int(fields[3]), int(fields[4])
            seen_header = True
        elif fields[0] == "v":
            if not seen_header or len(fields) != 3:
                raise ParseError(line_no, f"malformed part line: {line!r}")
            part_of[int(fields[1])] = int(fields[2])
        elif fields[0] == "e":
            if not seen_header or len(fields) != 3:
                raise ParseError(line_no, f"malformed edge line: {line!r}")
            edges.append((int(fields[1]), int(fields[2])))
        else:
            raise ParseError(line_no, f"unknown line tag {fields[0]!r}")
    if not seen_header:
        raise ParseError(1, "missing header")
    if len(edges) != m:
        raise ParseError(1, f"edge count mismatch: header says {m}, found {len(edges)}")
    parts: list[list[int]] = [[] for _ in range(k)]
    for v in range(1, n + 1):
        part = part_of.get(v)
        if part is None or not (1 <= part <= k):
            raise ParseError(1, f"vertex {v} has no valid part")
        parts[part - 1].append(v)
    return MccInstance(n, tuple(tuple(p) for p in parts), tuple(edges))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edpkit",
        description="Exact edge-disjoint paths solvers, oracles, and hard-instance generators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="decide an instance and emit a solution file on yes")
    solve.add_argument("files", nargs="+", help="instance files")
    solve.add_argument(
        "--engine",
        default="auto",
        choices=["auto", "sedp", "twdp", "fracture", "brute"],
        help="auto picks sedp when one feedback vertex suffices, then the fracture "
        "pipeline within --kmax, then the treewidth DP, then brute force",
    )
    solve.add_argument("--kmax", type=int, default=4, help="fracture modulator size bound (default 4)")
    solve.add_argument("--width-limit", type=int, default=None, help="treewidth target for twdp")
    solve.add_argument("--budget", type=int, default=10**7, help="brute-force node budget (default 1e7)")
    solve.add_argument("--jobs", type=int, default=1, help="solve multiple files concurrently")
    solve.add_argument("--solution", default=None, help="solution output path (default <file>.sol)")
    solve.set_defaults(func=_cmd_solve)

    verify = sub.add_parser("verify", help="check a solution file against an instance")
    verify.add_argument("instance")
    verify.add_argument("solution")
    verify.set_defaults(func=_cmd_verify)

    stats = sub.add_parser("stats", help="structural statistics of an instance")
    stats.add_argument("file")
    stats.add_argument("--kmax", type=int, default=4, help="exhaustive fracture search bound")
    stats.set_defaults(func=_cmd_stats)

    gen = sub.add_parser("gen", help="hard-instance generators")
    gensub = gen.add_subparsers(dest="generator", required=True)
    gsidon = gensub.add_parser("sidon", help="Sidon sequence of length n")
    gsidon.add_argument("n", type=int)
    gmcc = gensub.add_parser("mcc-pipeline", help="multicolored-clique hardness pipeline")
    gmcc.add_argument("file", help="mcc input file")
    gmedp = gensub.add_parser("medp", help="three-demand bounded-pairs-per-component instance")
    gmedp.add_argument("n1", type=int)
    gmedp.add_argument("n2", type=int)
    gmedp.add_argument("n3", type=int)
    gmedp.add_argument("file", help="muedp base file naming the three terminal pairs")
    gmedp.set_defaults()
    gen.set_defaults(func=_cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except NoModulator as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
