"""Finite relational structures: evaluation, sequent checking, enumeration.

Carriers are finite sets of int ids, not necessarily contiguous (the chase
leaves gaps after merges). Canonicalization relabels onto 0..n-1 via color
refinement plus minimization over the residual permutations, the same scheme
the poset layer uses.
"""

from __future__ import annotations

import itertools
import re
from functools import reduce

from .errors import InvalidInputError, ParseError, ResourceLimitError
from .theories import (
    And,
    Atom,
    Equal,
    Exists,
    Falsity,
    Formula,
    Or,
    Sequent,
    Signature,
    Theory,
    Truth,
    free_vars,
)

_MAX_CANON_PERMS = 2_000_000


class FinStructure:
    __slots__ = ("signature", "carrier", "relations", "_hash")

    def __init__(self, signature: Signature, carrier, relations: dict):
        self.signature = signature
        self.carrier = tuple(sorted(carrier))
        if len(set(self.carrier)) != len(self.carrier):
            raise InvalidInputError("duplicate carrier elements")
        elems = set(self.carrier)
        rels = {}
        for sym in signature.symbols:
            table = frozenset(tuple(t) for t in relations.get(sym, ()))
            arity = signature.arities[sym]
            for t in table:
                if len(t) != arity:
                    raise InvalidInputError(
                        f"{sym} tuple {t} has arity {len(t)}, expected {arity}")
                if not set(t) <= elems:
                    raise InvalidInputError(f"{sym} tuple {t} leaves the carrier")
            rels[sym] = table
        unknown = set(relations) - set(signature.symbols)
        if unknown:
            raise InvalidInputError(f"relations not in signature: {sorted(unknown)}")
        self.relations = rels
        self._hash = hash((signature, self.carrier,
                           tuple(sorted((s, tuple(sorted(rels[s])))
                                        for s in rels))))

    @property
    def n(self) -> int:
        return len(self.carrier)

    def holds(self, sym: str, args: tuple[int, ...]) -> bool:
        return args in self.relations[sym]

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FinStructure)
                and self.signature == other.signature
                and self.carrier == other.carrier
                and self.relations == other.relations)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        rels = {s: sorted(self.relations[s]) for s in self.signature.symbols}
        return f"FinStructure(carrier={self.carrier}, relations={rels})"


class PointedStructure:
    __slots__ = ("structure", "point")

    def __init__(self, structure: FinStructure, point: dict[str, int]):
        elems = set(structure.carrier)
        for var, e in point.items():
            if e not in elems:
                raise InvalidInputError(f"point sends {var!r} outside the carrier")
        self.structure = structure
        self.point = dict(point)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, PointedStructure)
                and self.structure == other.structure
                and self.point == other.point)

    def __hash__(self) -> int:
        return hash((self.structure, tuple(sorted(self.point.items()))))

    def __repr__(self) -> str:
        return f"PointedStructure({self.structure!r}, {self.point})"


def evaluate(f: Formula, p: PointedStructure) -> bool:
    """Tarski semantics for the coherent fragment; query connectives are not
    meaningful in a single structure and are rejected."""
    missing = [v for v in free_vars(f) if v not in p.point]
    if missing:
        raise InvalidInputError(f"point does not cover variables {missing}")
    return _eval(f, p.structure, p.point)


def satisfies(s: FinStructure, f: Formula, env: dict[str, int]) -> bool:
    """evaluate without the coverage check; env must bind every free variable."""
    return _eval(f, s, env)


def _eval(f: Formula, s: FinStructure, env: dict[str, int]) -> bool:
    if isinstance(f, Truth):
        return True
    if isinstance(f, Falsity):
        return False
    if isinstance(f, Atom):
        return tuple(env[v] for v in f.args) in s.relations[f.symbol]
    if isinstance(f, Equal):
        return env[f.left] == env[f.right]
    if isinstance(f, And):
        return _eval(f.left, s, env) and _eval(f.right, s, env)
    if isinstance(f, Or):
        return _eval(f.left, s, env) or _eval(f.right, s, env)
    if isinstance(f, Exists):
        return any(_eval(f.body, s, {**env, f.var: e}) for e in s.carrier)
    raise InvalidInputError(
        "only the coherent fragment can be evaluated in a single structure")


def check_theory(t: Theory, s: FinStructure) -> list[tuple[str, dict[str, int]]]:
    """(axiom name, assignment) for every violated axiom instance, in axiom
    order then assignment order over the sorted carrier."""
    violations = []
    for ax in t.axioms:
        for values in itertools.product(s.carrier, repeat=len(ax.context)):
            env = dict(zip(ax.context, values))
            if _eval(ax.lhs, s, env) and not _eval(ax.rhs, s, env):
                violations.append((ax.name, env))
    return violations


def _raw_structure_count(sig: Signature, size: int) -> int:
    return reduce(lambda acc, sym: acc * (1 << size ** sig.arities[sym]),
                  sig.symbols, 1)


def all_structures(sig: Signature, size: int):
    """Every structure on carrier 0..size-1, in a deterministic order."""
    carrier = tuple(range(size))
    tuple_spaces = []
    for sym in sig.symbols:
        tuples = sorted(itertools.product(carrier, repeat=sig.arities[sym]))
        subsets = []
        for bits in range(1 << len(tuples)):
            subsets.append(frozenset(t for i, t in enumerate(tuples)
                                     if bits >> i & 1))
        tuple_spaces.append(subsets)
    for combo in itertools.product(*tuple_spaces):
        yield FinStructure(sig, carrier, dict(zip(sig.symbols, combo)))


def enumerate_models(t: Theory, max_size: int,
                     max_raw: int = 2_000_000) -> list[FinStructure]:
    """All models with carrier at most max_size, one per isomorphism class.

    Raw enumeration with canonical dedup; the raw structure count is checked
    against max_raw up front so a too-big signature fails fast.
    """
    if max_size < 0:
        raise InvalidInputError("max_size must be nonnegative")
    total = sum(_raw_structure_count(t.signature, size)
                for size in range(max_size + 1))
    if total > max_raw:
        raise ResourceLimitError(
            f"{total} raw structures exceed the budget of {max_raw}")
    seen: dict[FinStructure, FinStructure] = {}
    for size in range(max_size + 1):
        for s in all_structures(t.signature, size):
            if check_theory(t, s):
                continue
            key = canonical_form(s)
            if key not in seen:
                seen[key] = key
    return sorted(seen.values(), key=_sort_key)


def _sort_key(s: FinStructure):
    return (s.n, tuple(sorted(s.relations[sym]) for sym in s.signature.symbols))


def _refine_colors(s: FinStructure) -> dict[int, int]:
    colors = {}
    for e in s.carrier:
        profile = []
        for sym in s.signature.symbols:
            for pos in range(s.signature.arities[sym]):
                profile.append(sum(1 for t in s.relations[sym] if t[pos] == e))
        colors[e] = tuple(profile)
    ranks = {c: i for i, c in enumerate(sorted(set(colors.values())))}
    colors = {e: ranks[colors[e]] for e in s.carrier}
    while True:
        refined = {}
        for e in s.carrier:
            occ = []
            for sym in s.signature.symbols:
                for t in s.relations[sym]:
                    for pos, x in enumerate(t):
                        if x == e:
                            occ.append((sym, pos, tuple(colors[y] for y in t)))
            refined[e] = (colors[e], tuple(sorted(occ)))
        ranks = {c: i for i, c in enumerate(sorted(set(refined.values())))}
        new = {e: ranks[refined[e]] for e in s.carrier}
        if new == colors:
            return colors
        colors = new


def _class_orderings(s: FinStructure, colors: dict[int, int]):
    """All relabelings element -> new id that respect the color classes."""
    classes: dict[int, list[int]] = {}
    for e in s.carrier:
        classes.setdefault(colors[e], []).append(e)
    ordered = [classes[c] for c in sorted(classes)]
    count = 1
    for cls in ordered:
        for k in range(2, len(cls) + 1):
            count *= k
        if count > _MAX_CANON_PERMS:
            raise ResourceLimitError("too many candidate relabelings")
    for perms in itertools.product(*(itertools.permutations(cls)
                                     for cls in ordered)):
        mapping = {}
        nxt = 0
        for block in perms:
            for e in block:
                mapping[e] = nxt
                nxt += 1
        yield mapping


def _encode(s: FinStructure, mapping: dict[int, int]):
    return tuple(tuple(sorted(tuple(mapping[x] for x in t)
                              for t in s.relations[sym]))
                 for sym in s.signature.symbols)


def canonical_form(s: FinStructure) -> FinStructure:
    """Isomorphism-invariant relabeling onto 0..n-1."""
    if s.n == 0:
        # no relabeling to do, but nullary facts must survive
        return FinStructure(s.signature, (), dict(s.relations))
    colors = _refine_colors(s)
    best = min(_encode(s, m) for m in _class_orderings(s, colors))
    relations = {sym: set(tuples)
                 for sym, tuples in zip(s.signature.symbols, best)}
    return FinStructure(s.signature, range(s.n), relations)


def is_isomorphic(s: FinStructure, t: FinStructure) -> bool:
    if s.signature != t.signature or s.n != t.n:
        return False
    if {sym: len(s.relations[sym]) for sym in s.relations} != \
            {sym: len(t.relations[sym]) for sym in t.relations}:
        return False
    return canonical_form(s) == canonical_form(t)


def embeds_into(s: FinStructure, t: FinStructure) -> bool:
    """Whether s is isomorphic to an induced substructure of t: some injection
    preserving and reflecting every relation."""
    if s.signature != t.signature or s.n > t.n:
        return False
    count = 1
    for k in range(t.n - s.n + 1, t.n + 1):
        count *= k
    if count > _MAX_CANON_PERMS:
        raise ResourceLimitError("too many candidate embeddings")
    syms = s.signature.symbols
    for image in itertools.permutations(t.carrier, s.n):
        m = dict(zip(s.carrier, image))
        ok = True
        for sym in syms:
            arity = s.signature.arities[sym]
            for args in itertools.product(s.carrier, repeat=arity):
                if (args in s.relations[sym]) != \
                        (tuple(m[a] for a in args) in t.relations[sym]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


# --- text format -------------------------------------------------------------

_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def load_structure(text: str, sig: Signature) -> tuple[FinStructure, tuple[str, ...]]:
    """`carrier: a b c` then `P: (a) (b)` lines; missing relations are empty."""
    names: list[str] = []
    relations: dict[str, set] = {}
    seen_carrier = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError("expected 'carrier:' or a relation line", ln, 1)
        key, rest = (part.strip() for part in line.split(":", 1))
        if key == "carrier":
            if seen_carrier:
                raise ParseError("duplicate carrier line", ln, 1)
            seen_carrier = True
            names = rest.split()
            if len(set(names)) != len(names):
                raise ParseError("duplicate carrier element names", ln, 1)
            continue
        if not seen_carrier:
            raise ParseError("carrier line must come first", ln, 1)
        if key not in sig.arities:
            raise ParseError(f"unknown relation {key!r}", ln, 1)
        if key in relations:
            raise ParseError(f"duplicate relation line {key!r}", ln, 1)
        index = {nm: i for i, nm in enumerate(names)}
        table = set()
        leftover = _TUPLE_RE.sub("", rest).strip()
        if leftover:
            raise ParseError(f"stray text {leftover!r} in relation line", ln, 1)
        for inner in _TUPLE_RE.findall(rest):
            parts = [p.strip() for p in inner.split(",")] if inner.strip() else []
            for p in parts:
                if p not in index:
                    raise ParseError(f"unknown element {p!r}", ln, 1)
            table.add(tuple(index[p] for p in parts))
        relations[key] = table
    if not seen_carrier:
        raise ParseError("missing carrier line", 1, 1)
    try:
        s = FinStructure(sig, range(len(names)), relations)
    except InvalidInputError as exc:
        raise ParseError(str(exc), 1, 1) from None
    return s, tuple(names)


def dump_structure(s: FinStructure, names: tuple[str, ...] | None = None) -> str:
    if names is None:
        names = tuple(str(e) for e in s.carrier)
    if len(names) != s.n:
        raise InvalidInputError("need one name per carrier element")
    by_elem = dict(zip(s.carrier, names))
    lines = [f"carrier: {' '.join(names)}"]
    for sym in s.signature.symbols:
        cells = " ".join(f"({', '.join(by_elem[x] for x in t)})"
                         for t in sorted(s.relations[sym]))
        lines.append(f"{sym}: {cells}".rstrip())
    return "\n".join(lines) + "\n"


def structure_to_json(s: FinStructure) -> dict:
    return {
        "carrier": list(s.carrier),
        "relations": {sym: sorted(list(t) for t in s.relations[sym])
                      for sym in s.signature.symbols},
    }
