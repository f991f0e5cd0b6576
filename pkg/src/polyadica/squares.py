"""Lax commutative squares and their interpolation-style deciders.

A square has corners A, B, C, D and maps f: A -> B, g: A -> C, u: B -> D,
v: C -> D, all lattice homs or all monotone poset maps. The orientation says
which composite lies below which; every decider first normalizes to the
``uf<=vg`` reading by swapping the two legs, so transposing a commutative
square genuinely asks a different question (and the tests pin a square where
the two answers differ).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Union

from .errors import ConsistencyError, InvalidInputError, ParseError
from .lattices import FinDistLattice, LatticeHom, left_adjoint, load_lattice
from .posets import (
    FinPoset,
    MonotoneMap,
    OrderRelation,
    compose_relations,
    corelation_of_map,
    load_poset,
    relation_of_map,
)

Corner = Union[FinDistLattice, FinPoset]
Arrow = Union[LatticeHom, MonotoneMap]

UF_LE_VG = "uf<=vg"
VG_LE_UF = "vg<=uf"


@dataclass(frozen=True)
class LaxSquare:
    a: Corner
    b: Corner
    c: Corner
    d: Corner
    f: Arrow
    g: Arrow
    u: Arrow
    v: Arrow
    orientation: str = UF_LE_VG

    def __post_init__(self):
        kinds = {type(x) for x in (self.a, self.b, self.c, self.d)}
        if kinds not in ({FinDistLattice}, {FinPoset}):
            raise InvalidInputError("square corners must be all lattices or all posets")
        arrow = LatticeHom if kinds == {FinDistLattice} else MonotoneMap
        for m in (self.f, self.g, self.u, self.v):
            if not isinstance(m, arrow):
                raise InvalidInputError("square maps must match the corner kind")
        wiring = [(self.f, self.a, self.b), (self.g, self.a, self.c),
                  (self.u, self.b, self.d), (self.v, self.c, self.d)]
        for m, dom, cod in wiring:
            if m.dom != dom or m.cod != cod:
                raise InvalidInputError("square maps do not match the corners")
        if self.orientation not in (UF_LE_VG, VG_LE_UF):
            raise InvalidInputError(f"unknown orientation {self.orientation!r}")
        lo, hi = ((self.u, self.f), (self.v, self.g))
        if self.orientation == VG_LE_UF:
            lo, hi = hi, lo
        for x in self.a.elements:
            if not self.d.leq(lo[0].apply(lo[1].apply(x)), hi[0].apply(hi[1].apply(x))):
                raise InvalidInputError("square is not lax commutative as oriented")

    @property
    def kind(self) -> str:
        return "lattice" if isinstance(self.a, FinDistLattice) else "poset"

    def normalized(self) -> "LaxSquare":
        if self.orientation == UF_LE_VG:
            return self
        return LaxSquare(a=self.a, b=self.c, c=self.b, d=self.d,
                         f=self.g, g=self.f, u=self.v, v=self.u)

    def transpose(self) -> "LaxSquare":
        """The same maps asked in the other direction. Needs the other lax
        inequality to hold, so this is total only on commutative squares."""
        flipped = VG_LE_UF if self.orientation == UF_LE_VG else UF_LE_VG
        return LaxSquare(a=self.a, b=self.b, c=self.c, d=self.d,
                         f=self.f, g=self.g, u=self.u, v=self.v, orientation=flipped)


@dataclass(frozen=True)
class InterpolationWitness:
    holds: bool
    witnesses: dict[tuple[int, int], int] | None = field(default=None)
    failure: tuple[int, int] | None = field(default=None)

    def __bool__(self) -> bool:
        return self.holds


def has_interpolation(s: LaxSquare) -> InterpolationWitness:
    """Decide the interpolation property, with a total witness table on success.

    For each b, c with u(b) <= v(c) the witness is the least a in the canonical
    element order of A with b <= f(a) and g(a) <= c.
    """
    s = s.normalized()
    table: dict[tuple[int, int], int] = {}
    for b in s.b.elements:
        ub = s.u.apply(b)
        for c in s.c.elements:
            if not s.d.leq(ub, s.v.apply(c)):
                continue
            for a in s.a.elements:
                if s.b.leq(b, s.f.apply(a)) and s.c.leq(s.g.apply(a), c):
                    table[(b, c)] = a
                    break
            else:
                return InterpolationWitness(holds=False, failure=(b, c))
    return InterpolationWitness(holds=True, witnesses=table)


def has_amalgamation(s: LaxSquare) -> bool:
    """The discrete-order form: equalities instead of inequalities throughout.

    Implemented independently of has_interpolation so the two can cross-check
    each other on squares with discrete order.
    """
    s = s.normalized()
    for b in s.b.elements:
        ub = s.u.apply(b)
        for c in s.c.elements:
            if ub != s.v.apply(c):
                continue
            if not any(s.f.apply(a) == b and s.g.apply(a) == c for a in s.a.elements):
                return False
    return True


def beck_chevalley_holds(s: LaxSquare) -> bool:
    """Whether the left adjoints commute with the square: g(badj_f(b)) == badj_v(u(b)).

    Always cross-checked against has_interpolation; a disagreement is a bug in
    one of the two deciders, never a property of the input.
    """
    if s.kind != "lattice":
        raise InvalidInputError("Beck-Chevalley needs lattice corners")
    s = s.normalized()
    ladj_f = left_adjoint(s.f)
    ladj_v = left_adjoint(s.v)
    answer = all(
        s.g.apply(ladj_f.apply(b)) == ladj_v.apply(s.u.apply(b))
        for b in s.b.elements
    )
    if answer != bool(has_interpolation(s)):
        raise ConsistencyError("Beck-Chevalley disagrees with the interpolation decider")
    return answer


def strong_interpolation(s: LaxSquare) -> bool:
    """The parameterized form: u(b meet f(a)) <= v(c) needs z with b <= f(z)
    and g(z meet a) <= c."""
    if s.kind != "lattice":
        raise InvalidInputError("strong interpolation needs lattice corners")
    s = s.normalized()
    for a in s.a.elements:
        fa = s.f.apply(a)
        for b in s.b.elements:
            lhs = s.u.apply(s.b.meet(b, fa))
            for c in s.c.elements:
                if not s.d.leq(lhs, s.v.apply(c)):
                    continue
                ok = any(
                    s.b.leq(b, s.f.apply(z)) and s.c.leq(s.g.apply(s.a.meet(z, a)), c)
                    for z in s.a.elements
                )
                if not ok:
                    return False
    return True


def _inverse_image_hom(m: MonotoneMap, dom_lat: FinDistLattice,
                       cod_lat: FinDistLattice) -> LatticeHom:
    # dom_lat is the up-set lattice of m.cod, cod_lat that of m.dom.
    table = {}
    for mask in dom_lat.elements:
        pre = 0
        for i, x in enumerate(m.dom.elements):
            if mask >> m.cod.index(m.table[x]) & 1:
                pre |= 1 << i
        table[mask] = pre
    return LatticeHom(dom_lat, cod_lat, table)


def dual_square(s: LaxSquare) -> LaxSquare:
    """The dual square on the other side of the duality.

    Corners travel as A, B, C, D -> dual(D), dual(B), dual(C), dual(A) and the
    two composable pairs swap roles, so dualizing twice comes back to a square
    isomorphic to the original (the tests check this through the unit maps).
    """
    from .duality import dual_hom, spectrum, upset_lattice

    s = s.normalized()
    if s.kind == "lattice":
        return LaxSquare(
            a=spectrum(s.d)[0], b=spectrum(s.b)[0], c=spectrum(s.c)[0],
            d=spectrum(s.a)[0],
            f=dual_hom(s.u), g=dual_hom(s.v), u=dual_hom(s.f), v=dual_hom(s.g))
    lat = {corner: upset_lattice(corner) for corner in (s.a, s.b, s.c, s.d)}
    return LaxSquare(
        a=lat[s.d], b=lat[s.b], c=lat[s.c], d=lat[s.a],
        f=_inverse_image_hom(s.u, lat[s.d], lat[s.b]),
        g=_inverse_image_hom(s.v, lat[s.d], lat[s.c]),
        u=_inverse_image_hom(s.f, lat[s.b], lat[s.a]),
        v=_inverse_image_hom(s.g, lat[s.c], lat[s.a]))


def check_selfduality(s: LaxSquare) -> bool:
    """Interpolation here must equal interpolation for the dual square."""
    here = bool(has_interpolation(s))
    there = bool(has_interpolation(dual_square(s)))
    if here != there:
        raise ConsistencyError("interpolation is not preserved by dualizing the square")
    return here


def weakening_relations(s: LaxSquare) -> tuple[OrderRelation, OrderRelation]:
    """(R1, R2): the composite relation through A and the comparison relation.

    R1 = {(b, c) | exists a: b <= f(a) and g(a) <= c}, built by composing the
    representing relations of f and g; R2 = {(b, c) | u(b) <= v(c)}. Lax
    commutativity makes R1 a subset of R2, and interpolation says they agree.
    """
    s = s.normalized()
    if s.kind == "lattice":
        f_m, g_m = s.f.monotone(), s.g.monotone()
        b_p, c_p, d_p = s.b.poset, s.c.poset, s.d.poset
    else:
        f_m, g_m = s.f, s.g
        b_p, c_p, d_p = s.b, s.c, s.d
    r1 = compose_relations(corelation_of_map(f_m), relation_of_map(g_m))
    r2 = OrderRelation(b_p, c_p,
                       [(b, c) for b in s.b.elements for c in s.c.elements
                        if d_p.leq(s.u.apply(b), s.v.apply(c))])
    return r1, r2


def load_square(path: str) -> tuple[LaxSquare, dict[str, tuple[str, ...]]]:
    """Load a square file: kind, four object file paths, four maps, orientation.

    Object paths are resolved relative to the square file. Map lines list
    ``name->name`` entries using the element names of the corner files.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    base = os.path.dirname(os.path.abspath(path))
    fields: dict[str, str] = {}
    positions: dict[str, int] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", ln, 1)
        key, value = (part.strip() for part in line.split(":", 1))
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", ln, 1)
        fields[key] = value
        positions[key] = ln
    required = {"kind", "A", "B", "C", "D", "f", "g", "u", "v", "orientation"}
    missing = required - set(fields)
    if missing:
        raise InvalidInputError(f"square file missing keys: {sorted(missing)}")
    kind = fields["kind"]
    if kind not in ("lattice", "poset"):
        raise InvalidInputError(f"kind must be lattice or poset, got {kind!r}")
    load = load_lattice if kind == "lattice" else load_poset
    corners = {}
    names = {}
    for key in "ABCD":
        obj_path = os.path.join(base, fields[key])
        try:
            with open(obj_path, encoding="utf-8") as fh:
                corners[key], names[key] = load(fh.read())
        except OSError as exc:
            raise InvalidInputError(f"cannot read corner {key}: {exc}") from exc

    def parse_map(key: str, dom_key: str, cod_key: str):
        dom_names = {nm: i for i, nm in enumerate(names[dom_key])}
        cod_names = {nm: i for i, nm in enumerate(names[cod_key])}
        dom_elems = corners[dom_key].elements
        cod_elems = corners[cod_key].elements
        table = {}
        for entry in fields[key].split():
            if "->" not in entry:
                raise ParseError(f"map entry {entry!r} is not 'x->y'", positions[key], 1)
            src, dst = entry.split("->", 1)
            if src not in dom_names or dst not in cod_names:
                raise ParseError(f"map entry {entry!r} names unknown elements",
                                 positions[key], 1)
            table[dom_elems[dom_names[src]]] = cod_elems[cod_names[dst]]
        arrow = LatticeHom if kind == "lattice" else MonotoneMap
        return arrow(corners[dom_key], corners[cod_key], table)

    square = LaxSquare(a=corners["A"], b=corners["B"], c=corners["C"], d=corners["D"],
                       f=parse_map("f", "A", "B"), g=parse_map("g", "A", "C"),
                       u=parse_map("u", "B", "D"), v=parse_map("v", "C", "D"),
                       orientation=fields["orientation"])
    return square, names
