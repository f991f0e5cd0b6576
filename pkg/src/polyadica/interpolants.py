"""Interpolant extraction for lattice squares.

find_interpolant answers the pointwise question behind has_interpolation: for
one comparable pair (b, c) it returns the least witness in canonical element
order, or None. heyting_pushout_interpolate wraps the pushout of a span of
Heyting homs, where a witness always exists; a miss there is a bug in the
pushout or the Heyting test, so it raises the internal-consistency error
instead of returning None.
"""

from __future__ import annotations

from .duality import pushout
from .errors import ConsistencyError, InvalidInputError
from .lattices import LatticeHom, is_heyting_hom
from .squares import UF_LE_VG, LaxSquare


def find_interpolant(s: LaxSquare, b: int, c: int) -> int | None:
    """Least a with b <= f(a) and g(a) <= c, read in s's orientation.

    Requires u(b) <= v(c) (in the flipped orientation, v(c) <= u(b)); pairs the
    cospan does not relate are rejected as invalid input, since for them the
    question is vacuous rather than unwitnessed.
    """
    if s.kind != "lattice":
        raise InvalidInputError("interpolant extraction needs lattice corners")
    n = s.normalized()
    nb, nc = (b, c) if s.orientation == UF_LE_VG else (c, b)
    n.b.index(nb)
    n.c.index(nc)
    if not n.d.leq(n.u.apply(nb), n.v.apply(nc)):
        raise InvalidInputError("the cospan does not relate b and c")
    for a in n.a.elements:
        if n.b.leq(nb, n.f.apply(a)) and n.c.leq(n.g.apply(a), nc):
            return a
    return None


def heyting_pushout_interpolate(f: LatticeHom, g: LatticeHom, b: int, c: int) -> int:
    """Interpolant for (b, c) across the pushout of a span of Heyting homs.

    b lives in f's codomain and c in g's; the pushout legs must relate them.
    Existence is guaranteed for Heyting spans, so absence raises
    ConsistencyError rather than returning None.
    """
    if not is_heyting_hom(f) or not is_heyting_hom(g):
        raise InvalidInputError("both span legs must preserve relative implication")
    d, u, v = pushout(f, g)
    if not d.leq(u.apply(b), v.apply(c)):
        raise InvalidInputError("the pushout legs do not relate b and c")
    s = LaxSquare(a=f.dom, b=f.cod, c=g.cod, d=d, f=f, g=g, u=u, v=v)
    a = find_interpolant(s, b, c)
    if a is None:
        raise ConsistencyError(
            "a pushout square of Heyting homs has no interpolant; "
            "the pushout or the Heyting check is broken")
    return a
