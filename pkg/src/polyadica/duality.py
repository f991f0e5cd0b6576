"""Finite duality between distributive lattices and posets.

At finite scale the dual space of a lattice is just the poset of its prime
filters (no topology survives), and the dual of a poset is its lattice of
up-sets. Prime filters are found through join-irreducible elements, which is
quadratic; the exponential homs-to-2 enumeration lives in the test suite as a
cross-check oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import ConsistencyError, InvalidInputError
from .lattices import FinDistLattice, LatticeHom, is_frobenius, left_adjoint
from .posets import FinPoset, MonotoneMap, is_bounded, up_closure


@dataclass(frozen=True)
class DualityWitness:
    """The unit/counit data tying a lattice to its dual space.

    unit maps each lattice element a to the up-set of points whose filter
    contains a; counit maps each point to its prime filter. The unit is a
    lattice isomorphism onto the up-set lattice of the space, which the test
    suite verifies explicitly.
    """

    lattice: FinDistLattice
    space: FinPoset
    unit: dict[int, frozenset[int]]
    counit: dict[int, frozenset[int]]


def _join_irreducibles(l: FinDistLattice) -> list[int]:
    out = []
    for j in l.elements:
        strictly_below = [x for x in l.elements if l.leq(x, j) and x != j]
        if l.join_all(strictly_below) != j:
            out.append(j)
    return out


def _check_prime_filter(l: FinDistLattice, filt: frozenset[int]) -> None:
    # The indicator must be a bounded lattice hom onto {0, 1}.
    if l.top not in filt or l.bot in filt:
        raise ConsistencyError("candidate filter misses top or contains bot")
    for a in l.elements:
        for b in l.elements:
            if (l.meet(a, b) in filt) != (a in filt and b in filt):
                raise ConsistencyError("candidate filter is not meet-prime")
            if (l.join(a, b) in filt) != (a in filt or b in filt):
                raise ConsistencyError("candidate filter is not join-prime")


@lru_cache(maxsize=None)
def spectrum(l: FinDistLattice) -> tuple[FinPoset, DualityWitness]:
    """The poset of prime filters, ordered by inclusion.

    Point ids are 0..k-1 in a canonical order (filters sorted by size then
    content), so equal lattices always get identical spectra.
    """
    filters = []
    for j in _join_irreducibles(l):
        filt = frozenset(a for a in l.elements if l.leq(j, a))
        _check_prime_filter(l, filt)
        filters.append(filt)
    filters.sort(key=lambda f: (len(f), sorted(f)))
    k = len(filters)
    pairs = [(i, j) for i in range(k) for j in range(k) if filters[i] <= filters[j]]
    space = FinPoset(range(k), pairs, _trusted=True)
    unit = {a: frozenset(x for x in range(k) if a in filters[x]) for a in l.elements}
    counit = {x: filters[x] for x in range(k)}
    return space, DualityWitness(lattice=l, space=space, unit=unit, counit=counit)


@lru_cache(maxsize=None)
def upset_lattice(p: FinPoset) -> FinDistLattice:
    """The lattice of up-sets of p. Element ids are bitmasks over p's indices."""
    return FinDistLattice.from_upset_masks(p.up_set_masks())


def dual_hom(h: LatticeHom) -> MonotoneMap:
    """The dual of a hom A -> B: precomposition spec(B) -> spec(A)."""
    sp_dom, wit_dom = spectrum(h.dom)
    sp_cod, wit_cod = spectrum(h.cod)
    by_filter = {wit_dom.counit[x]: x for x in sp_dom.elements}
    table = {}
    for y in sp_cod.elements:
        pre = frozenset(a for a in h.dom.elements if h.table[a] in wit_cod.counit[y])
        if pre not in by_filter:
            raise ConsistencyError("preimage of a prime filter is not prime")
        table[y] = by_filter[pre]
    return MonotoneMap(sp_cod, sp_dom, table)


def hom_from_dual(phi: MonotoneMap, dom: FinDistLattice, cod: FinDistLattice) -> LatticeHom:
    """Rebuild the hom dom -> cod whose dual is phi: spec(cod) -> spec(dom)."""
    _, wit_dom = spectrum(dom)
    sp_cod, wit_cod = spectrum(cod)
    by_upset = {frozenset(pts): e for e, pts in wit_cod.unit.items()}
    table = {}
    for a in dom.elements:
        hat = wit_dom.unit[a]
        pre = frozenset(y for y in sp_cod.elements if phi.table[y] in hat)
        if pre not in by_upset:
            raise ConsistencyError("preimage of a unit up-set is not a unit up-set")
        table[a] = by_upset[pre]
    return LatticeHom(dom, cod, table)


def check_frobenius_bounded(h: LatticeHom) -> bool:
    """Decide the Frobenius property on both sides of the duality at once."""
    algebraic = is_frobenius(h)
    spatial = is_bounded(dual_hom(h))
    if algebraic != spatial:
        raise ConsistencyError(
            "Frobenius on the lattice side disagrees with boundedness of the dual map")
    return algebraic


def openness_of_dual(h: LatticeHom) -> bool:
    """Check the finite content of openness for the dual map of h.

    Verifies the adjoint formula (the image of the left adjoint under the unit
    is the up-closure of the dual map's direct image) and that lower
    semi-openness of the dual map coincides with the Frobenius property.
    Returns the lower semi-openness verdict.
    """
    f = dual_hom(h)
    ladj = left_adjoint(h)
    sp_dom, wit_dom = spectrum(h.dom)
    _sp_cod, wit_cod = spectrum(h.cod)
    for b in h.cod.elements:
        image = [f.table[y] for y in wit_cod.unit[b]]
        expected = up_closure(sp_dom, image)
        if wit_dom.unit[ladj.table[b]] != expected:
            raise ConsistencyError("left adjoint disagrees with up-closed direct image")
    semi_open = is_bounded(f)
    if semi_open != is_frobenius(h):
        raise ConsistencyError("lower semi-openness disagrees with Frobenius")
    return semi_open


def pushout(f: LatticeHom, g: LatticeHom) -> tuple[FinDistLattice, LatticeHom, LatticeHom]:
    """Pushout of a span B <- A -> C, computed as the dual of a poset pullback.

    Returns (D, u: B -> D, v: C -> D) with u after f equal to v after g.
    Elements of D are up-set bitmasks over the pullback poset of the dual maps.
    """
    if f.dom != g.dom:
        raise InvalidInputError("pushout legs must share a domain")
    sp_b, wit_b = spectrum(f.cod)
    sp_c, wit_c = spectrum(g.cod)
    fd = dual_hom(f)
    gd = dual_hom(g)
    pairs = [(y, z) for y in sp_b.elements for z in sp_c.elements
             if fd.table[y] == gd.table[z]]
    order = [(i, j) for i, (y1, z1) in enumerate(pairs)
             for j, (y2, z2) in enumerate(pairs)
             if sp_b.leq(y1, y2) and sp_c.leq(z1, z2)]
    pb = FinPoset(range(len(pairs)), order, _trusted=True)
    d = upset_lattice(pb)
    u_table = {}
    for b in f.cod.elements:
        hat = wit_b.unit[b]
        u_table[b] = sum(1 << i for i, (y, _z) in enumerate(pairs) if y in hat)
    v_table = {}
    for c in g.cod.elements:
        hat = wit_c.unit[c]
        v_table[c] = sum(1 << i for i, (_y, z) in enumerate(pairs) if z in hat)
    u = LatticeHom(f.cod, d, u_table)
    v = LatticeHom(g.cod, d, v_table)
    for a in f.dom.elements:
        if u.table[f.table[a]] != v.table[g.table[a]]:
            raise ConsistencyError("pushout square does not commute")
    return d, u, v
