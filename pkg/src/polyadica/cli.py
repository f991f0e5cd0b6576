"""Command-line surface over the library.

Every subcommand loads its inputs, calls one library routine, and prints
either human-readable text or, with --json, a byte-stable JSON document
(sorted keys, fixed indentation, no timestamps). Exit codes are uniform:
0 success or positive verdict, 1 negative verdict (countermodel, failed
property), 2 unknown or budget exhausted, 3 usage or input error, 4 internal
consistency violation (two theorem-linked deciders disagreed - always a bug).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .chase import BUDGET, SATURATED, ChaseBudget, refute, run_chase, tree_to_json
from .duality import spectrum, upset_lattice
from .errors import (
    ConsistencyError,
    InvalidInputError,
    ParseError,
    ResourceLimitError,
)
from .exhaustive import (
    beck_chevalley_suite,
    duality_round_trip_suite,
    frobenius_projection_suite,
    frobenius_suite,
    heyting_pushout_suite,
    lax_squares_exhaustive,
    lax_squares_sampled,
    selfduality_suite,
)
from .interpolants import find_interpolant
from .lattices import FinDistLattice, load_lattice
from .posets import FinPoset, load_poset
from .squares import (
    beck_chevalley_holds,
    check_selfduality,
    has_amalgamation,
    has_interpolation,
    load_square,
    strong_interpolation,
)
from .structures import FinStructure, dump_structure, enumerate_models, load_structure, structure_to_json
from .theories import load_theory, parse_sequent
from .typespace import approx_to_dot, approx_type_space, check_polyadic_axioms

OK = 0
NEGATIVE = 1
UNKNOWN = 2
USAGE = 3
INCONSISTENT = 4


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _poset_json(p: FinPoset, names: tuple[str, ...]) -> dict:
    by_id = {e: names[i] for i, e in enumerate(p.elements)}
    return {
        "elements": list(names),
        "covers": [[by_id[a], by_id[b]] for a, b in p.covers()],
    }


def _lattice_json(l: FinDistLattice, names: tuple[str, ...]) -> dict:
    by_id = {e: names[i] for i, e in enumerate(l.elements)}
    out = _poset_json(l.poset, names)
    out["bot"] = by_id[l.bot]
    out["top"] = by_id[l.top]
    return out


def _poset_text(p: FinPoset, names: tuple[str, ...]) -> str:
    by_id = {e: names[i] for i, e in enumerate(p.elements)}
    lines = ["elements: " + " ".join(names)]
    lines += [f"{by_id[a]} <= {by_id[b]}" for a, b in p.covers()]
    return "\n".join(lines)


def _cmd_dualize(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    is_lattice = any(
        line.split("#", 1)[0].strip().startswith(("bot:", "top:"))
        for line in text.splitlines())
    if is_lattice:
        lat, names = load_lattice(text)
        by_id = {e: names[i] for i, e in enumerate(lat.elements)}
        space, witness = spectrum(lat)
        point_names = tuple(
            "{" + ",".join(by_id[e] for e in lat.elements
                           if e in witness.counit[pt]) + "}"
            for pt in space.elements)
        if args.json:
            _print_json({"input": "lattice", "dual": _poset_json(space, point_names)})
        else:
            print(_poset_text(space, point_names))
    else:
        p, names = load_poset(text)
        lat = upset_lattice(p)
        mask_names = tuple(
            "{" + ",".join(names[i] for i in range(p.n) if mask >> i & 1) + "}"
            for mask in lat.elements)
        if args.json:
            _print_json({"input": "poset", "dual": _lattice_json(lat, mask_names)})
        else:
            by_id = {e: mask_names[i] for i, e in enumerate(lat.elements)}
            print(_poset_text(lat.poset, mask_names))
            print(f"bot: {by_id[lat.bot]}")
            print(f"top: {by_id[lat.top]}")
    return OK


def _suite_json(report) -> dict:
    return {"name": report.name, "cases": report.cases,
            "failures": list(report.failures), "ok": report.ok}


def _cmd_check_duality(args) -> int:
    report = duality_round_trip_suite(args.max_size)
    if args.json:
        _print_json(_suite_json(report))
    else:
        print(report.line())
    return OK if report.ok else INCONSISTENT


def _cmd_check_square(args) -> int:
    square, _ = load_square(args.file)
    verdicts = {
        "interpolation": bool(has_interpolation(square)),
        "amalgamation": has_amalgamation(square),
        "selfduality": check_selfduality(square),
    }
    if square.kind == "lattice":
        verdicts["beck_chevalley"] = beck_chevalley_holds(square)
        verdicts["strong_interpolation"] = strong_interpolation(square)
    else:
        verdicts["beck_chevalley"] = None
        verdicts["strong_interpolation"] = None
    if args.json:
        _print_json({"kind": square.kind, "orientation": square.orientation,
                     "verdicts": verdicts})
    else:
        print(f"kind: {square.kind}  orientation: {square.orientation}")
        for key in ("interpolation", "amalgamation", "beck_chevalley",
                    "strong_interpolation", "selfduality"):
            value = verdicts[key]
            print(f"{key}: {'n/a' if value is None else ('yes' if value else 'no')}")
    return OK if verdicts["interpolation"] else NEGATIVE


def _cmd_models(args) -> int:
    t = load_theory(args.theory)
    models = enumerate_models(t, args.max_size)
    if args.json:
        _print_json([structure_to_json(m) for m in models])
    else:
        print(f"{len(models)} models of {t.name} up to size {args.max_size}")
        for i, m in enumerate(models):
            print(f"# model {i}")
            print(dump_structure(m), end="")
    return OK


def _budget(args) -> ChaseBudget:
    return ChaseBudget(max_nodes=args.max_nodes, max_carrier=args.max_carrier,
                       max_depth=args.max_depth)


def _start_structure(args, t) -> FinStructure:
    if args.start is None:
        return FinStructure(t.signature, (), {})
    with open(args.start, encoding="utf-8") as fh:
        structure, _ = load_structure(fh.read(), t.signature)
    return structure


def _cmd_chase(args) -> int:
    t = load_theory(args.theory)
    tree = run_chase(t, _start_structure(args, t), _budget(args))
    doc = tree_to_json(tree)
    if args.emit_tree:
        with open(args.emit_tree, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    statuses: dict[str, int] = {}
    for node in tree.nodes:
        statuses[node.status] = statuses.get(node.status, 0) + 1
    if args.json:
        _print_json(doc)
    else:
        print(f"{len(tree.nodes)} nodes; " +
              ", ".join(f"{k}: {v}" for k, v in sorted(statuses.items())))
        for leaf in tree.saturated_leaves():
            print(f"# saturated node {leaf.index}")
            print(dump_structure(leaf.structure), end="")
    if statuses.get(SATURATED):
        return OK
    if statuses.get(BUDGET):
        return UNKNOWN
    return NEGATIVE


def _cmd_prove(args) -> int:
    t = load_theory(args.theory)
    goal = parse_sequent(args.sequent, t.signature)
    result = refute(t, goal, _budget(args))
    payload = {
        "verdict": result.verdict,
        "nodes": len(result.tree.nodes),
        "countermodel": None,
        "point": None,
    }
    if result.countermodel is not None:
        payload["countermodel"] = structure_to_json(result.countermodel.structure)
        payload["point"] = dict(result.countermodel.point)
    if args.json:
        _print_json(payload)
    else:
        print(f"verdict: {result.verdict} ({payload['nodes']} nodes)")
        if result.countermodel is not None:
            print(f"point: {payload['point']}")
            print(dump_structure(result.countermodel.structure), end="")
    return {"refuted": OK, "countermodel": NEGATIVE, "unknown": UNKNOWN}[result.verdict]


def _cmd_typespace(args) -> int:
    t = load_theory(args.theory)
    fam = approx_type_space(t, args.max_arity, args.max_model, args.max_depth,
                            max_basis=args.max_basis)
    report = check_polyadic_axioms(fam)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(approx_to_dot(fam))
    if args.json:
        _print_json({
            "params": list(fam.params),
            "arities": [_poset_json(fam.posets[n], fam.labels[n])
                        for n in range(fam.max_arity + 1)],
            "report": {
                "ok": report.ok,
                "squares_checked": report.squares_checked,
                "maps_checked": report.maps_checked,
                "skipped_spans": report.skipped_spans,
                "int1_failures": report.int1_failures,
                "int2_failures": report.int2_failures,
                "amalgamation_failures": report.amalgamation_failures,
            },
        })
    else:
        for n in range(fam.max_arity + 1):
            print(f"arity {n}: {fam.posets[n].n} types: "
                  + " ".join(fam.labels[n]))
        for line in report.lines():
            print(line)
    return OK if report.ok else NEGATIVE


def _cmd_interpolate(args) -> int:
    square, names = load_square(args.file)
    b_names = {nm: e for nm, e in zip(names["B"], square.b.elements)}
    c_names = {nm: e for nm, e in zip(names["C"], square.c.elements)}
    if args.b not in b_names:
        raise InvalidInputError(f"{args.b!r} is not an element of corner B")
    if args.c not in c_names:
        raise InvalidInputError(f"{args.c!r} is not an element of corner C")
    witness = find_interpolant(square, b_names[args.b], c_names[args.c])
    a_names = {e: nm for nm, e in zip(names["A"], square.a.elements)}
    if args.json:
        _print_json({"b": args.b, "c": args.c,
                     "interpolant": None if witness is None else a_names[witness]})
    else:
        print("no interpolant" if witness is None else f"interpolant: {a_names[witness]}")
    return OK if witness is not None else NEGATIVE


def _cmd_selftest(args) -> int:
    squares = list(lax_squares_exhaustive(min(args.max_size, 2)))
    if args.max_size >= 3:
        squares += list(lax_squares_sampled(3, args.samples, args.seed))
    reports = [
        duality_round_trip_suite(args.max_size),
        beck_chevalley_suite(squares),
        selfduality_suite(squares),
        frobenius_suite(min(args.max_size, 3)),
        heyting_pushout_suite(min(args.max_size, 3)),
        frobenius_projection_suite(min(args.max_size, 2)),
    ]
    if args.json:
        _print_json({"suites": [_suite_json(r) for r in reports]})
    else:
        for r in reports:
            print(r.line())
    return OK if all(r.ok for r in reports) else INCONSISTENT


def _default_nodes() -> int:
    raw = os.environ.get("POLYADICA_BUDGET_NODES")
    if raw is None:
        return 500
    try:
        return int(raw)
    except ValueError:
        raise InvalidInputError(
            f"POLYADICA_BUDGET_NODES must be an integer, got {raw!r}") from None


def _add_budget_flags(sub) -> None:
    sub.add_argument("--max-nodes", type=int, default=None,
                     help="node budget (default: POLYADICA_BUDGET_NODES or 500)")
    sub.add_argument("--max-carrier", type=int, default=16)
    sub.add_argument("--max-depth", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyadica",
        description="finite duality, square interpolation, and coherent-logic chase tools")
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name: str, func, **kwargs):
        s = subs.add_parser(name, **kwargs)
        s.add_argument("--json", action="store_true", help="machine-readable output")
        s.set_defaults(func=func)
        return s

    s = sub("dualize", _cmd_dualize, help="print the dual of a lattice or poset file")
    s.add_argument("file")

    s = sub("check-duality", _cmd_check_duality, help="exhaustive duality round trip")
    s.add_argument("--max-size", type=int, default=4)

    s = sub("check-square", _cmd_check_square, help="run all square deciders")
    s.add_argument("file")

    s = sub("models", _cmd_models, help="enumerate canonical models of a theory")
    s.add_argument("theory")
    s.add_argument("--max-size", type=int, default=3)

    s = sub("chase", _cmd_chase, help="saturate a theory from a start structure")
    s.add_argument("theory")
    s.add_argument("--start", default=None, help="structure file (default: empty)")
    s.add_argument("--emit-tree", default=None, metavar="OUT.JSON")
    _add_budget_flags(s)

    s = sub("prove", _cmd_prove, help="chase the denial of a sequent")
    s.add_argument("theory")
    s.add_argument("--sequent", required=True, help='e.g. "P(x) |- exists u. Q(u)"')
    _add_budget_flags(s)

    s = sub("typespace", _cmd_typespace, help="approximate type spaces and check their axioms")
    s.add_argument("theory")
    s.add_argument("--max-arity", type=int, default=2)
    s.add_argument("--max-model", type=int, default=3)
    s.add_argument("--max-depth", type=int, default=1)
    s.add_argument("--max-basis", type=int, default=20_000)
    s.add_argument("--dot", default=None, metavar="OUT.DOT")

    s = sub("interpolate", _cmd_interpolate, help="find the least interpolant for a pair")
    s.add_argument("file")
    s.add_argument("--b", required=True, help="element name in corner B")
    s.add_argument("--c", required=True, help="element name in corner C")

    s = sub("selftest", _cmd_selftest, help="run the exhaustive proposition suites")
    s.add_argument("--max-size", type=int, default=3)
    s.add_argument("--samples", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return OK if ex.code == 0 else USAGE
    try:
        if getattr(args, "max_nodes", 1) is None:
            args.max_nodes = _default_nodes()
        return args.func(args)
    except ConsistencyError as ex:
        print(f"consistency violation: {ex}", file=sys.stderr)
        return INCONSISTENT
    except ResourceLimitError as ex:
        print(f"resource limit: {ex}", file=sys.stderr)
        return UNKNOWN
    except ParseError as ex:
        print(f"parse error: {ex}", file=sys.stderr)
        return USAGE
    except (InvalidInputError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
