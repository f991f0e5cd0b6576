"""Finite distributive lattices and their homomorphisms.

Meet and join are stored as explicit index tables computed once at
construction; the exhaustive suites hammer them hard enough that recomputing
greatest lower bounds from the order each time would dominate.
"""

from __future__ import annotations

from typing import Iterable

from .errors import ConsistencyError, InvalidInputError, ParseError
from .posets import FinPoset, MonotoneMap, load_poset, dump_poset


class FinDistLattice:
    """A finite distributive lattice given by its order relation.

    The constructor derives meet/join tables and bottom/top from the order and
    fails if any pair lacks a greatest lower or least upper bound. The
    distributivity check is O(n^3) and runs unless ``validate=False``; the
    library disables it only for constructions that are distributive by
    theorem (up-set lattices, sublattices), which the tests re-validate.
    """

    __slots__ = ("_poset", "_meet", "_join", "bot", "top", "_hash")

    def __init__(self, elements: Iterable[int], pairs: Iterable[tuple[int, int]], *,
                 validate: bool = True, _trusted_order: bool = False):
        self._poset = FinPoset(elements, pairs, _trusted=_trusted_order)
        n = self._poset.n
        if n == 0:
            raise InvalidInputError("a lattice needs at least one element (bot = top)")
        self._meet = self._bound_table(lower=True)
        self._join = self._bound_table(lower=False)
        full = (1 << n) - 1
        bot_i = next(i for i in range(n) if self._poset.up_mask(i) == full)
        top_i = next(i for i in range(n) if self._poset.down_mask(i) == full)
        self.bot = self._poset.elements[bot_i]
        self.top = self._poset.elements[top_i]
        if validate:
            self._check_distributive()
        self._hash = hash(("lattice", self._poset))

    def _bound_table(self, *, lower: bool) -> tuple[tuple[int, ...], ...]:
        p = self._poset
        n = p.n
        side = p.down_mask if lower else p.up_mask
        back = p.up_mask if lower else p.down_mask
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                common = side(i) & side(j)
                found = -1
                m = common
                while m:
                    low = m & -m
                    k = low.bit_length() - 1
                    if common & ~side(k) == 0:
                        found = k
                        break
                    m ^= low
                if found < 0:
                    kind = "greatest lower" if lower else "least upper"
                    raise InvalidInputError(
                        f"not a lattice: elements {p.elements[i]} and {p.elements[j]} "
                        f"have no {kind} bound")
                row.append(found)
            table.append(tuple(row))
        return tuple(table)

    def _check_distributive(self) -> None:
        n = self._poset.n
        for i in range(n):
            mi = self._meet[i]
            for j in range(n):
                for k in range(n):
                    if mi[self._join[j][k]] != self._join[mi[j]][mi[k]]:
                        e = self._poset.elements
                        raise InvalidInputError(
                            f"not distributive at ({e[i]}, {e[j]}, {e[k]})")

    @classmethod
    def from_pairs(cls, elements: Iterable[int], pairs: Iterable[tuple[int, int]], *,
                   validate: bool = True) -> "FinDistLattice":
        """Build from a generating relation (closed before the lattice checks)."""
        poset = FinPoset.from_pairs(elements, pairs)
        full = [(a, b) for a in poset.elements for b in poset.elements if poset.leq(a, b)]
        return cls(poset.elements, full, validate=validate, _trusted_order=True)

    @classmethod
    def from_upset_masks(cls, masks: list[int]) -> "FinDistLattice":
        """Trusted fast path: elements are up-set bitmasks, order is inclusion."""
        masks = sorted(set(masks), key=lambda m: (m.bit_count(), m))
        order = [(a, b) for a in masks for b in masks if a & ~b == 0]
        lat = cls.__new__(cls)
        lat._poset = FinPoset(masks, order, _trusted=True)
        idx = {m: i for i, m in enumerate(masks)}
        lat._meet = tuple(tuple(idx[a & b] for b in masks) for a in masks)
        lat._join = tuple(tuple(idx[a | b] for b in masks) for a in masks)
        lat.bot = 0
        lat.top = masks[-1] if masks else 0
        if lat.bot not in idx or lat.top != max(masks):
            raise InvalidInputError("up-set family must contain empty and full sets")
        lat._hash = hash(("lattice", lat._poset))
        return lat

    @classmethod
    def chain(cls, n: int) -> "FinDistLattice":
        return cls(range(n), [(i, j) for i in range(n) for j in range(i, n)],
                   validate=False, _trusted_order=True)

    @property
    def poset(self) -> FinPoset:
        """The underlying order, shared with adjoints and the dual side."""
        return self._poset

    @property
    def elements(self) -> tuple[int, ...]:
        return self._poset.elements

    @property
    def n(self) -> int:
        return self._poset.n

    def index(self, e: int) -> int:
        return self._poset.index(e)

    def leq(self, a: int, b: int) -> bool:
        return self._poset.leq(a, b)

    def meet(self, a: int, b: int) -> int:
        return self._poset.elements[self._meet[self.index(a)][self.index(b)]]

    def join(self, a: int, b: int) -> int:
        return self._poset.elements[self._join[self.index(a)][self.index(b)]]

    def meet_all(self, items: Iterable[int]) -> int:
        acc = self.top
        for e in items:
            acc = self.meet(acc, e)
        return acc

    def join_all(self, items: Iterable[int]) -> int:
        acc = self.bot
        for e in items:
            acc = self.join(acc, e)
        return acc

    def validate(self) -> None:
        """Recheck everything the trusting constructors skipped."""
        fresh = FinDistLattice(self.elements,
                               [(a, b) for a in self.elements for b in self.elements
                                if self.leq(a, b)])
        if fresh._meet != self._meet or fresh._join != self._join:
            raise ConsistencyError("stored meet/join tables disagree with the order")
        if (fresh.bot, fresh.top) != (self.bot, self.top):
            raise ConsistencyError("stored bounds disagree with the order")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinDistLattice) and self._poset == other._poset

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"FinDistLattice({self.n} elements)"


class LatticeHom:
    """A bounded lattice homomorphism: preserves meet, join, bot, and top."""

    __slots__ = ("dom", "cod", "table", "_hash")

    def __init__(self, dom: FinDistLattice, cod: FinDistLattice, table: dict[int, int]):
        self.dom = dom
        self.cod = cod
        self.table = dict(table)
        if set(self.table) != set(dom.elements):
            raise InvalidInputError("hom table is not total on the domain")
        for v in self.table.values():
            cod.index(v)
        if self.table[dom.bot] != cod.bot or self.table[dom.top] != cod.top:
            raise InvalidInputError("hom does not preserve the bounds")
        for a in dom.elements:
            for b in dom.elements:
                if self.table[dom.meet(a, b)] != cod.meet(self.table[a], self.table[b]):
                    raise InvalidInputError(f"hom does not preserve meet at ({a}, {b})")
                if self.table[dom.join(a, b)] != cod.join(self.table[a], self.table[b]):
                    raise InvalidInputError(f"hom does not preserve join at ({a}, {b})")
        self._hash = hash((dom, cod, tuple(sorted(self.table.items()))))

    @classmethod
    def identity(cls, l: FinDistLattice) -> "LatticeHom":
        return cls(l, l, {e: e for e in l.elements})

    def apply(self, e: int) -> int:
        try:
            return self.table[e]
        except KeyError:
            raise InvalidInputError(f"element {e!r} not in domain") from None

    __call__ = apply

    def then(self, other: "LatticeHom") -> "LatticeHom":
        """Composition: self first, then other."""
        if self.cod != other.dom:
            raise InvalidInputError("composition domain mismatch")
        return LatticeHom(self.dom, other.cod,
                          {e: other.table[v] for e, v in self.table.items()})

    def monotone(self) -> MonotoneMap:
        return MonotoneMap(self.dom.poset, self.cod.poset, self.table)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, LatticeHom) and self.dom == other.dom
                and self.cod == other.cod and self.table == other.table)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"LatticeHom({self.table})"


def heyting_implies(l: FinDistLattice, a: int, b: int) -> int:
    """Largest c with c meet a <= b. Always exists in a finite distributive lattice."""
    c = l.join_all(x for x in l.elements if l.leq(l.meet(x, a), b))
    if not l.leq(l.meet(c, a), b):
        raise ConsistencyError("residuation failed; lattice is not distributive")
    return c


def is_boolean(l: FinDistLattice) -> bool:
    for a in l.elements:
        if not any(l.meet(a, b) == l.bot and l.join(a, b) == l.top for b in l.elements):
            return False
    return True


def projection(l: FinDistLattice, a: int) -> tuple[FinDistLattice, LatticeHom]:
    """The down-set of `a` as a lattice, with the surjection x -> a meet x."""
    l.index(a)
    keep = [x for x in l.elements if l.leq(x, a)]
    sub = FinDistLattice(keep, [(x, y) for x in keep for y in keep if l.leq(x, y)],
                         validate=False, _trusted_order=True)
    hom = LatticeHom(l, sub, {x: l.meet(a, x) for x in l.elements})
    return sub, hom


def restrict_hom(h: LatticeHom, a: int) -> LatticeHom:
    """h restricted to the down-set of a, landing in the down-set of h(a)."""
    sub_dom, _ = projection(h.dom, a)
    sub_cod, _ = projection(h.cod, h.apply(a))
    return LatticeHom(sub_dom, sub_cod, {x: h.apply(x) for x in sub_dom.elements})


def left_adjoint(h: LatticeHom) -> MonotoneMap:
    """The left adjoint of h as a monotone map cod -> dom.

    For finite lattice homs the pointwise meet formula always satisfies the
    adjunction law; that is verified and a failure reported as a library bug.
    """
    table = {b: h.dom.meet_all(a for a in h.dom.elements if h.cod.leq(b, h.table[a]))
             for b in h.cod.elements}
    for b in h.cod.elements:
        for a in h.dom.elements:
            if h.dom.leq(table[b], a) != h.cod.leq(b, h.table[a]):
                raise ConsistencyError("left adjoint candidate fails the adjunction law")
    return MonotoneMap(h.cod.poset, h.dom.poset, table)


def right_adjoint(h: LatticeHom) -> MonotoneMap:
    table = {b: h.dom.join_all(a for a in h.dom.elements if h.cod.leq(h.table[a], b))
             for b in h.cod.elements}
    for b in h.cod.elements:
        for a in h.dom.elements:
            if h.dom.leq(a, table[b]) != h.cod.leq(h.table[a], b):
                raise ConsistencyError("right adjoint candidate fails the adjunction law")
    return MonotoneMap(h.cod.poset, h.dom.poset, table)


def is_frobenius(h: LatticeHom) -> bool:
    """Whether every projection square of h admits interpolation."""
    from .squares import LaxSquare, has_interpolation

    for a in h.dom.elements:
        sub_dom, p_a = projection(h.dom, a)
        sub_cod, p_ha = projection(h.cod, h.apply(a))
        square = LaxSquare(a=h.dom, b=h.cod, c=sub_dom, d=sub_cod,
                           f=h, g=p_a, u=p_ha, v=restrict_hom(h, a))
        if not has_interpolation(square):
            return False
    return True


def frobenius_reciprocity_holds(h: LatticeHom) -> bool:
    """Left-adjoint form: badj(b meet h(a)) == badj(b) meet a for all a, b."""
    ladj = left_adjoint(h)
    for a in h.dom.elements:
        ha = h.table[a]
        for b in h.cod.elements:
            if ladj.table[h.cod.meet(b, ha)] != h.dom.meet(ladj.table[b], a):
                return False
    return True


def is_heyting_hom(h: LatticeHom) -> bool:
    for a in h.dom.elements:
        for b in h.dom.elements:
            lhs = h.table[heyting_implies(h.dom, a, b)]
            rhs = heyting_implies(h.cod, h.table[a], h.table[b])
            if lhs != rhs:
                return False
    return True


def load_lattice(text: str) -> tuple[FinDistLattice, tuple[str, ...]]:
    """Parse the lattice text format: the poset format plus bot:/top: lines.

    Meet/join tables are recomputed from the order; declared bounds must match
    the derived ones and the result must be distributive.
    """
    poset_lines = []
    declared: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("bot:") or line.startswith("top:"):
            key, value = line.split(":", 1)
            if key in declared:
                raise ParseError(f"duplicate {key}: line", ln, 1)
            declared[key] = value.strip()
        else:
            poset_lines.append(raw)
    poset, names = load_poset("\n".join(poset_lines))
    if set(declared) != {"bot", "top"}:
        raise InvalidInputError("lattice file needs exactly one bot: and one top: line")
    index = {nm: i for i, nm in enumerate(names)}
    for key in ("bot", "top"):
        if declared[key] not in index:
            raise InvalidInputError(f"{key}: names unknown element {declared[key]!r}")
    lat = FinDistLattice(poset.elements,
                         [(a, b) for a in poset.elements for b in poset.elements
                          if poset.leq(a, b)])
    if lat.bot != index[declared["bot"]] or lat.top != index[declared["top"]]:
        raise InvalidInputError("declared bot/top disagree with the order")
    return lat, names


def dump_lattice(l: FinDistLattice, names: tuple[str, ...] | None = None) -> str:
    if names is None:
        names = tuple(str(e) for e in l.elements)
    by_id = {e: names[i] for i, e in enumerate(l.elements)}
    return (dump_poset(l.poset, names)
            + f"bot: {by_id[l.bot]}\ntop: {by_id[l.top]}\n")
