"""Finite posets, monotone maps, and order (weakening) relations.

Element ids are opaque small integers. Every poset carries a canonical element
order (the order of its ``elements`` tuple); subsets are handled internally as
bitmasks over that order, which keeps the exhaustive suites cheap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import InvalidInputError, ParseError, ResourceLimitError

# Up-set enumeration and canonical forms are desk-scale operations; these caps
# turn runaway inputs into errors instead of hangs.
_MAX_UPSET_ELEMENTS = 22
_MAX_CANON_PERMS = 2_000_000


class FinPoset:
    """A finite partially ordered set.

    The constructor expects the full order relation and checks reflexivity,
    transitivity, and antisymmetry. Antisymmetry violations are hard errors,
    never silently quotiented. Use :meth:`from_pairs` to close a generating
    relation first.
    """

    __slots__ = ("elements", "_index", "_up", "_down", "_hash")

    def __init__(self, elements: Iterable[int], pairs: Iterable[tuple[int, int]], *,
                 _trusted: bool = False):
        self.elements: tuple[int, ...] = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise InvalidInputError("duplicate element ids")
        self._index = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        up = [1 << i for i in range(n)]
        for a, b in pairs:
            ia, ib = self._lookup(a), self._lookup(b)
            up[ia] |= 1 << ib
        self._up: tuple[int, ...] = tuple(up)
        down = [0] * n
        for i in range(n):
            m = up[i]
            while m:
                low = m & -m
                down[low.bit_length() - 1] |= 1 << i
                m ^= low
        self._down: tuple[int, ...] = tuple(down)
        if not _trusted:
            self._validate()
        self._hash = hash((self.elements, self._up))

    def _lookup(self, e: int) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise InvalidInputError(f"element {e!r} not in poset") from None

    def _validate(self) -> None:
        n = len(self.elements)
        for i in range(n):
            if self._up[i] & self._down[i] != 1 << i:
                j = ((self._up[i] & self._down[i]) & ~(1 << i)).bit_length() - 1
                raise InvalidInputError(
                    f"antisymmetry violated: {self.elements[i]} and {self.elements[j]} "
                    "are mutually comparable")
            m = self._up[i]
            while m:
                low = m & -m
                j = low.bit_length() - 1
                if self._up[j] & ~self._up[i]:
                    raise InvalidInputError("relation is not transitive")
                m ^= low

    @classmethod
    def from_pairs(cls, elements: Iterable[int], pairs: Iterable[tuple[int, int]]) -> "FinPoset":
        """Build from a generating relation: reflexive-transitive closure, then checks."""
        elements = tuple(elements)
        index = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        up = [1 << i for i in range(n)]
        for a, b in pairs:
            if a not in index or b not in index:
                raise InvalidInputError(f"pair ({a!r}, {b!r}) mentions unknown element")
            up[index[a]] |= 1 << index[b]
        changed = True
        while changed:
            changed = False
            for i in range(n):
                m, acc = up[i], up[i]
                while m:
                    low = m & -m
                    acc |= up[low.bit_length() - 1]
                    m ^= low
                if acc != up[i]:
                    up[i] = acc
                    changed = True
        closed = [(elements[i], elements[j]) for i in range(n) for j in range(n)
                  if up[i] >> j & 1]
        return cls(elements, closed)

    @classmethod
    def chain(cls, n: int) -> "FinPoset":
        return cls(range(n), [(i, j) for i in range(n) for j in range(i, n)], _trusted=True)

    @classmethod
    def antichain(cls, n: int) -> "FinPoset":
        return cls(range(n), [(i, i) for i in range(n)], _trusted=True)

    @property
    def n(self) -> int:
        return len(self.elements)

    def index(self, e: int) -> int:
        return self._lookup(e)

    def up_mask(self, i: int) -> int:
        """Bitmask (by index) of elements above the element with index i."""
        return self._up[i]

    def down_mask(self, i: int) -> int:
        return self._down[i]

    def leq(self, a: int, b: int) -> bool:
        return bool(self._up[self._lookup(a)] >> self._lookup(b) & 1)

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.leq(a, b)

    def mask_of(self, s: Iterable[int]) -> int:
        m = 0
        for e in s:
            m |= 1 << self._lookup(e)
        return m

    def set_of(self, mask: int) -> frozenset[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(self.elements[low.bit_length() - 1])
            mask ^= low
        return frozenset(out)

    def up_closure_mask(self, mask: int) -> int:
        acc = 0
        while mask:
            low = mask & -mask
            acc |= self._up[low.bit_length() - 1]
            mask ^= low
        return acc

    def is_up_set(self, s: Iterable[int]) -> bool:
        m = self.mask_of(s)
        return self.up_closure_mask(m) == m

    def up_set_masks(self) -> list[int]:
        """All up-sets as index bitmasks, sorted by (size, value)."""
        n = self.n
        if n > _MAX_UPSET_ELEMENTS:
            raise ResourceLimitError(f"up-set enumeration over {n} elements refused")
        out = [m for m in range(1 << n)
               if all(self._up[i] & ~m == 0 for i in range(n) if m >> i & 1)]
        out.sort(key=lambda m: (m.bit_count(), m))
        return out

    def covers(self) -> list[tuple[int, int]]:
        """Pairs (a, b) with a < b and nothing strictly between."""
        out = []
        for i in range(self.n):
            for j in range(self.n):
                if i != j and self._up[i] >> j & 1:
                    between = self._up[i] & self._down[j] & ~(1 << i) & ~(1 << j)
                    if between == 0:
                        out.append((self.elements[i], self.elements[j]))
        return out

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FinPoset) and self.elements == other.elements
                and self._up == other._up)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"FinPoset({len(self.elements)} elements)"


class MonotoneMap:
    """A monotone (order-preserving) map between finite posets."""

    __slots__ = ("dom", "cod", "table", "_hash")

    def __init__(self, dom: FinPoset, cod: FinPoset, table: dict[int, int]):
        self.dom = dom
        self.cod = cod
        self.table = dict(table)
        if set(self.table) != set(dom.elements):
            raise InvalidInputError("map table is not total on the domain")
        for v in self.table.values():
            cod.index(v)
        for i in range(dom.n):
            a = dom.elements[i]
            m = dom.up_mask(i)
            while m:
                low = m & -m
                b = dom.elements[low.bit_length() - 1]
                if not cod.leq(self.table[a], self.table[b]):
                    raise InvalidInputError(
                        f"not monotone: {a} <= {b} but images are unordered")
                m ^= low
        self._hash = hash((dom, cod, tuple(sorted(self.table.items()))))

    @classmethod
    def identity(cls, p: FinPoset) -> "MonotoneMap":
        return cls(p, p, {e: e for e in p.elements})

    def apply(self, e: int) -> int:
        try:
            return self.table[e]
        except KeyError:
            raise InvalidInputError(f"element {e!r} not in domain") from None

    __call__ = apply

    def then(self, other: "MonotoneMap") -> "MonotoneMap":
        """Composition: self first, then other."""
        if self.cod != other.dom:
            raise InvalidInputError("composition domain mismatch")
        return MonotoneMap(self.dom, other.cod,
                           {e: other.table[v] for e, v in self.table.items()})

    def image_mask(self, mask: int) -> int:
        out = 0
        while mask:
            low = mask & -mask
            out |= 1 << self.cod.index(self.table[self.dom.elements[low.bit_length() - 1]])
            mask ^= low
        return out

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, MonotoneMap) and self.dom == other.dom
                and self.cod == other.cod and self.table == other.table)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"MonotoneMap({self.table})"


class OrderRelation:
    """An order relation from A to B: an up-set of A^op x B.

    Membership is downward closed on the left and upward closed on the right;
    construction rejects anything else.
    """

    __slots__ = ("dom", "cod", "pairs", "_hash")

    def __init__(self, dom: FinPoset, cod: FinPoset, pairs: Iterable[tuple[int, int]]):
        self.dom = dom
        self.cod = cod
        self.pairs = frozenset(pairs)
        for a, b in self.pairs:
            dom.index(a)
            cod.index(b)
        for a, b in self.pairs:
            for a2 in dom.elements:
                if dom.leq(a2, a):
                    for b2 in cod.elements:
                        if cod.leq(b, b2) and (a2, b2) not in self.pairs:
                            raise InvalidInputError(
                                f"not a weakening relation: ({a}, {b}) is in but "
                                f"({a2}, {b2}) is not")
        self._hash = hash((dom, cod, self.pairs))

    def holds(self, a: int, b: int) -> bool:
        return (a, b) in self.pairs

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, OrderRelation) and self.dom == other.dom
                and self.cod == other.cod and self.pairs == other.pairs)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"OrderRelation({len(self.pairs)} pairs)"


def up_closure(p: FinPoset, s: Iterable[int]) -> frozenset[int]:
    """Smallest up-set containing s."""
    return p.set_of(p.up_closure_mask(p.mask_of(s)))


def down_closure(p: FinPoset, s: Iterable[int]) -> frozenset[int]:
    acc = 0
    for e in s:
        acc |= p.down_mask(p.index(e))
    return p.set_of(acc)


def is_bounded(m: MonotoneMap) -> bool:
    """Whether direct images of up-sets are up-sets.

    Checked pointwise: for every x and every y >= m(x) there must be x' >= x
    with m(x') = y. Equivalent to the up-set formulation, which the tests
    exercise directly as an oracle.
    """
    for x in m.dom.elements:
        fx = m.table[x]
        above = m.cod.up_mask(m.cod.index(fx))
        while above:
            low = above & -above
            y = m.cod.elements[low.bit_length() - 1]
            above ^= low
            ok = False
            ux = m.dom.up_mask(m.dom.index(x))
            while ux:
                l2 = ux & -ux
                if m.table[m.dom.elements[l2.bit_length() - 1]] == y:
                    ok = True
                    break
                ux ^= l2
            if not ok:
                return False
    return True


def relation_of_map(m: MonotoneMap) -> OrderRelation:
    """The relation {(a, b) | m(a) <= b} representing m."""
    pairs = [(a, b) for a in m.dom.elements for b in m.cod.elements
             if m.cod.leq(m.table[a], b)]
    return OrderRelation(m.dom, m.cod, pairs)


def corelation_of_map(m: MonotoneMap) -> OrderRelation:
    """The relation {(b, a) | b <= m(a)} representing m from the other side."""
    pairs = [(b, a) for b in m.cod.elements for a in m.dom.elements
             if m.cod.leq(b, m.table[a])]
    return OrderRelation(m.cod, m.dom, pairs)


def identity_relation(p: FinPoset) -> OrderRelation:
    return relation_of_map(MonotoneMap.identity(p))


def compose_relations(r: OrderRelation, s: OrderRelation) -> OrderRelation:
    """Relational composition, r first then s."""
    if r.cod != s.dom:
        raise InvalidInputError("relation composition domain mismatch")
    mids: dict[int, set[int]] = {}
    for b, c in s.pairs:
        mids.setdefault(b, set()).add(c)
    pairs = {(a, c) for a, b in r.pairs for c in mids.get(b, ())}
    return OrderRelation(r.dom, s.cod, pairs)


def _refine_colors(p: FinPoset) -> list[int]:
    n = p.n
    colors = [(p.down_mask(i).bit_count(), p.up_mask(i).bit_count()) for i in range(n)]
    while True:
        sig = []
        for i in range(n):
            ups = sorted(colors[j] for j in range(n) if j != i and p.up_mask(i) >> j & 1)
            downs = sorted(colors[j] for j in range(n) if j != i and p.down_mask(i) >> j & 1)
            sig.append((colors[i], tuple(ups), tuple(downs)))
        ranks = {s: k for k, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if new == colors:
            return new
        colors = new


def _class_permutations(colors: list[int]) -> Iterator[tuple[int, ...]]:
    """All relabelings old-index -> new-label that respect color classes."""
    classes: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        classes.setdefault(c, []).append(i)
    ordered = [classes[c] for c in sorted(classes)]
    total = 1
    for cl in ordered:
        for k in range(2, len(cl) + 1):
            total *= k
        if total > _MAX_CANON_PERMS:
            raise ResourceLimitError("canonical form search space too large")
    starts = list(itertools.accumulate([0] + [len(cl) for cl in ordered[:-1]]))
    for choice in itertools.product(*[itertools.permutations(cl) for cl in ordered]):
        perm = [0] * len(colors)
        for base, cl in zip(starts, choice):
            for off, old in enumerate(cl):
                perm[old] = base + off
        yield tuple(perm)


def _encode(p: FinPoset, perm: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    pairs = []
    for i in range(p.n):
        m = p.up_mask(i)
        while m:
            low = m & -m
            pairs.append((perm[i], perm[low.bit_length() - 1]))
            m ^= low
    return tuple(sorted(pairs))


def canonical_form(p: FinPoset) -> FinPoset:
    """Isomorphism-invariant relabeling onto 0..n-1 (minimal relation encoding)."""
    if p.n == 0:
        return FinPoset((), ())
    colors = _refine_colors(p)
    best = min(_encode(p, perm) for perm in _class_permutations(colors))
    return FinPoset(range(p.n), best, _trusted=True)


def is_isomorphic(p: FinPoset, q: FinPoset) -> bool:
    if p.n != q.n:
        return False
    return canonical_form(p) == canonical_form(q)


def load_poset(text: str) -> tuple[FinPoset, tuple[str, ...]]:
    """Parse the poset text format.

    Line 1: ``elements: a b c``; then any number of ``a <= b`` lines giving a
    generating relation (closed reflexively and transitively on load).
    Returns the poset over ids 0..n-1 plus the element names in id order.
    """
    names: tuple[str, ...] | None = None
    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if names is None:
            if not line.startswith("elements:"):
                raise ParseError("expected 'elements:' line", ln, 1)
            names = tuple(line[len("elements:"):].split())
            if len(set(names)) != len(names):
                raise ParseError("duplicate element name", ln, 1)
            index = {nm: i for i, nm in enumerate(names)}
            continue
        if "<=" not in line:
            raise ParseError("expected 'a <= b' line", ln, 1)
        left, right = (part.strip() for part in line.split("<=", 1))
        for nm in (left, right):
            if nm not in index:
                raise ParseError(f"unknown element {nm!r}", ln, raw.find(nm) + 1)
        pairs.append((index[left], index[right]))
    if names is None:
        raise ParseError("empty poset file", 1, 1)
    try:
        poset = FinPoset.from_pairs(range(len(names)), pairs)
    except InvalidInputError as exc:
        raise InvalidInputError(f"bad poset file: {exc}") from exc
    return poset, names


def dump_poset(p: FinPoset, names: tuple[str, ...] | None = None) -> str:
    if names is None:
        names = tuple(str(e) for e in p.elements)
    if len(names) != p.n:
        raise InvalidInputError("names length mismatch")
    by_id = {e: names[i] for i, e in enumerate(p.elements)}
    lines = ["elements: " + " ".join(names)]
    for a, b in p.covers():
        lines.append(f"{by_id[a]} <= {by_id[b]}")
    return "\n".join(lines) + "\n"
