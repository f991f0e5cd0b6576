import pytest

from polyadica.errors import ConsistencyError, InvalidInputError
from polyadica.exhaustive import all_heyting_homs, lax_squares_exhaustive
from polyadica.interpolants import find_interpolant, heyting_pushout_interpolate
from polyadica.lattices import FinDistLattice, LatticeHom, projection, restrict_hom
from polyadica.posets import FinPoset, MonotoneMap
from polyadica.squares import LaxSquare, has_interpolation

C2 = FinDistLattice.chain(2)
C3 = FinDistLattice.chain(3)
H_DOWN = LatticeHom(C3, C2, {0: 0, 1: 0, 2: 1})
H_UP = LatticeHom(C3, C2, {0: 0, 1: 1, 2: 1})


def projection_square(h, a):
    sub_dom, p_a = projection(h.dom, a)
    sub_cod, p_ha = projection(h.cod, h.table[a])
    return LaxSquare(a=h.dom, b=h.cod, c=sub_dom, d=sub_cod,
                     f=h, g=p_a, u=p_ha, v=restrict_hom(h, a))


def identity_square(lat):
    i = LatticeHom.identity(lat)
    return LaxSquare(a=lat, b=lat, c=lat, d=lat, f=i, g=i, u=i, v=i)


def test_identity_square_interpolant_is_the_element():
    s = identity_square(C3)
    for b in C3.elements:
        assert find_interpolant(s, b, b) == b


def test_frobenius_projection_square_at_top_mid():
    # witnesses at (top of B, mid) are {mid, top}; the least one wins
    s = projection_square(H_UP, 1)
    assert find_interpolant(s, 1, 1) == 1


def test_non_frobenius_square_has_gap_at_top_bottom():
    s = projection_square(H_DOWN, 1)
    assert find_interpolant(s, 1, 0) is None


def test_unrelated_pair_is_rejected():
    s = identity_square(C2)
    with pytest.raises(InvalidInputError):
        find_interpolant(s, 1, 0)


def test_unknown_elements_are_rejected():
    s = identity_square(C2)
    with pytest.raises(InvalidInputError):
        find_interpolant(s, 5, 0)
    with pytest.raises(InvalidInputError):
        find_interpolant(s, 0, 5)


def test_poset_squares_are_rejected():
    p = FinPoset.chain(2)
    i = MonotoneMap.identity(p)
    s = LaxSquare(a=p, b=p, c=p, d=p, f=i, g=i, u=i, v=i)
    with pytest.raises(InvalidInputError):
        find_interpolant(s, 0, 0)


def test_flipped_orientation_reads_the_other_inequality():
    i = LatticeHom.identity(C3)
    v = LatticeHom(C3, C3, {0: 0, 1: 0, 2: 2})
    s = LaxSquare(a=C3, b=C3, c=C3, d=C3, f=i, g=i, u=i, v=v,
                  orientation="vg<=uf")
    # here (b, c) is eligible when v(c) <= b, and a must satisfy c <= a <= b
    assert find_interpolant(s, 1, 1) == 1
    assert find_interpolant(s, 0, 1) is None
    with pytest.raises(InvalidInputError):
        find_interpolant(s, 0, 2)


def test_agrees_with_witness_tables_everywhere_small():
    for s in lax_squares_exhaustive(2):
        w = has_interpolation(s)
        if w:
            for (b, c), a in w.witnesses.items():
                assert find_interpolant(s, b, c) == a
        else:
            assert find_interpolant(s, *w.failure) is None


def test_heyting_pushout_identity_span():
    i = LatticeHom.identity(C3)
    for b in C3.elements:
        assert heyting_pushout_interpolate(i, i, b, b) == b


def test_heyting_pushout_glued_chains():
    emb = LatticeHom(C2, C3, {0: 0, 1: 2})
    # the two middles land incomparable, so (mid, mid) carries no obligation
    with pytest.raises(InvalidInputError):
        heyting_pushout_interpolate(emb, emb, 1, 1)
    # mid of the left copy sits below the image of the right top
    assert heyting_pushout_interpolate(emb, emb, 1, 2) == 1


def test_heyting_pushout_rejects_non_heyting_legs():
    with pytest.raises(InvalidInputError):
        heyting_pushout_interpolate(H_DOWN, H_DOWN, 0, 0)


def test_heyting_pushout_one_element_span():
    one = FinDistLattice.chain(1)
    i = LatticeHom.identity(one)
    assert heyting_pushout_interpolate(i, i, 0, 0) == one.bot


def test_heyting_pushout_never_errors_on_small_spans():
    lats = [C2, C3]
    for a in lats:
        for b_lat in lats:
            for c_lat in lats:
                for f in all_heyting_homs(a, b_lat):
                    for g in all_heyting_homs(a, c_lat):
                        from polyadica.duality import pushout
                        d, u, v = pushout(f, g)
                        for b in b_lat.elements:
                            for c in c_lat.elements:
                                if d.leq(u.apply(b), v.apply(c)):
                                    heyting_pushout_interpolate(f, g, b, c)
