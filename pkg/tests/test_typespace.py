import itertools

import pytest

from polyadica import three_models_path
from polyadica.errors import InvalidInputError, ResourceLimitError
from polyadica.posets import FinPoset, MonotoneMap, is_bounded, is_isomorphic
from polyadica.theories import Signature, Theory, load_theory, parse_theory
from polyadica.typespace import (
    AxiomCheck,
    PolyadicApprox,
    approx_to_dot,
    approx_type_space,
    builtin_counterexample,
    builtin_space,
    check_polyadic_axioms,
    compose_vars,
    pushout_of_span,
    var_maps,
)
from theorygen import random_theory

# Direct transliteration of the closed form, kept independent of the module
# so the two can drift apart only by failing these tests.

LETTER_LEQ = {("x", "x"), ("y", "y"), ("z", "z"), ("y", "x"), ("z", "x")}


def oracle_points(n):
    both = set(itertools.product("xy", repeat=n)) | set(itertools.product("xz", repeat=n))
    return sorted(both)


def oracle_leq(a, b):
    if any((s, t) not in LETTER_LEQ for s, t in zip(a, b)):
        return False
    return all(not (a[i] == a[j] and b[i] != b[j])
               for i in range(len(a)) for j in range(len(a)))


def point_index(n, letters):
    return oracle_points(n).index(tuple(letters))


def test_builtin_sizes():
    assert [builtin_space(n)[0].n for n in range(5)] == [1, 3, 7, 15, 31]


def test_builtin_labels_golden():
    assert builtin_space(0)[1] == ("()",)
    assert builtin_space(1)[1] == ("x", "y", "z")
    assert builtin_space(2)[1] == ("x,x", "x,y", "x,z", "y,x", "y,y", "z,x", "z,z")


def test_builtin_order_spot_checks():
    p, labels = builtin_space(2)
    at = {lab: i for i, lab in enumerate(labels)}
    assert p.leq(at["y,y"], at["x,x"])
    assert p.leq(at["y,x"], at["x,x"])
    assert not p.leq(at["y,y"], at["x,y"])  # equal coordinates must stay equal
    assert not p.leq(at["y,y"], at["y,x"])
    assert not p.leq(at["x,y"], at["y,y"])
    assert p.leq(at["z,z"], at["x,x"]) and not p.leq(at["z,z"], at["z,x"])
    assert all(p.leq(e, e) for e in p.elements)


def test_builtin_order_matches_oracle_up_to_4():
    for n in range(5):
        p, _ = builtin_space(n)
        pts = oracle_points(n)
        for i, a in enumerate(pts):
            for j, b in enumerate(pts):
                assert p.leq(i, j) == oracle_leq(a, b), (n, a, b)


def test_builtin_reindexing_selects_coordinates():
    fam = builtin_counterexample(2)
    swap = fam.reindex(2, 2, (1, 0))
    assert swap.apply(point_index(2, ("x", "y"))) == point_index(2, ("y", "x"))
    diag = fam.reindex(2, 1, (0, 0))
    assert diag.apply(point_index(1, "y")) == point_index(2, ("y", "y"))
    snd = fam.reindex(1, 2, (1,))
    assert snd.apply(point_index(2, ("x", "z"))) == point_index(1, "z")
    drop = fam.reindex(0, 2, ())
    assert all(drop.apply(e) == 0 for e in fam.posets[2].elements)


def test_builtin_reindexing_composes():
    fam = builtin_counterexample(2)
    for n, m, l in itertools.product(range(3), repeat=3):
        for sigma in var_maps(n, m):
            for tau in var_maps(m, l):
                lhs = fam.reindex(m, l, tau).then(fam.reindex(n, m, sigma))
                assert lhs.table == fam.reindex(n, l, compose_vars(sigma, tau)).table


def test_check_axioms_builtin2_golden():
    rep = check_polyadic_axioms(builtin_counterexample(2))
    assert isinstance(rep, AxiomCheck)
    assert rep.int1_failures == ()
    assert rep.int2_failures == ()
    assert rep.amalgamation_failures == (
        ((0, 1, 1, (), ()), "y", "z"),
        ((0, 1, 1, (), ()), "z", "y"),
    )
    assert (rep.squares_checked, rep.maps_checked, rep.skipped_spans) == (32, 11, 11)
    assert not rep.ok
    assert rep.lines() == [
        "interpolation over pushout squares: ok (32 squares, 11 spans skipped)",
        "bounded reindexing: ok (11 maps)",
        "amalgamation: 2 failures (32 squares, 11 spans skipped)",
    ]


def test_check_axioms_builtin3_failures_all_mix_letters():
    rep = check_polyadic_axioms(builtin_counterexample(3))
    assert rep.int1_failures == () and rep.int2_failures == ()
    assert len(rep.amalgamation_failures) == 662
    for _, b, c in rep.amalgamation_failures:
        assert ("y" in b and "z" in c) or ("z" in b and "y" in c)


def test_check_axioms_span_bound():
    rep = check_polyadic_axioms(builtin_counterexample(2), span_bound=1)
    assert (rep.squares_checked, rep.skipped_spans) == (5, 0)
    assert len(rep.amalgamation_failures) == 2 and rep.int1_failures == ()
    with pytest.raises(InvalidInputError):
        check_polyadic_axioms(builtin_counterexample(1), span_bound=3)


def test_unbounded_reindexing_is_reported():
    chain2 = FinPoset([0, 1], [(0, 1)])
    const0 = MonotoneMap(chain2, chain2, {0: 0, 1: 0})
    assert not is_bounded(const0)
    fam = PolyadicApprox(
        [chain2, chain2],
        {(0, 0, ()): MonotoneMap.identity(chain2),
         (1, 1, (0,)): MonotoneMap.identity(chain2),
         (0, 1, ()): const0},
        [("bot", "top"), ("bot", "top")], "exact")
    rep = check_polyadic_axioms(fam)
    assert rep.int2_failures == ((0, 1, ()),)
    assert not rep.ok
    assert "bounded reindexing: 1 failures (3 maps)" in rep.lines()[1]


def test_constant_singleton_family_passes_everything():
    sing = FinPoset([0], [])
    one = MonotoneMap.identity(sing)
    maps = {(n, m, sigma): one
            for n in range(3) for m in range(3) for sigma in var_maps(n, m)}
    fam = PolyadicApprox([sing] * 3, maps, [("pt",)] * 3, "exact")
    rep = check_polyadic_axioms(fam)
    assert rep.ok
    assert (rep.squares_checked, rep.skipped_spans, rep.maps_checked) == (32, 11, 11)


def test_pushout_goldens():
    assert pushout_of_span(0, 1, 1, (), ()) == (2, (0,), (1,))
    assert pushout_of_span(1, 1, 1, (0,), (0,)) == (1, (0,), (0,))
    assert pushout_of_span(2, 2, 1, (0, 1), (0, 0)) == (1, (0, 0), (0,))
    assert pushout_of_span(0, 2, 2, (), ()) == (4, (0, 1), (2, 3))
    assert pushout_of_span(1, 2, 2, (0,), (1,)) == (3, (0, 1), (2, 0))
    with pytest.raises(InvalidInputError):
        pushout_of_span(2, 1, 1, (0,), (0, 0))


def test_var_maps_and_composition():
    assert list(var_maps(0, 0)) == [()]
    assert list(var_maps(1, 0)) == []
    assert list(var_maps(2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert compose_vars((1, 0), (0, 0, 1)) == (0, 0)
    assert compose_vars((), (0, 1)) == ()
    with pytest.raises(InvalidInputError):
        var_maps(-1, 2)


def test_family_accessors():
    fam = builtin_counterexample(1)
    assert fam.max_arity == 1
    assert fam.space(1).n == 3
    with pytest.raises(InvalidInputError):
        fam.space(2)
    with pytest.raises(InvalidInputError):
        fam.reindex(1, 2, (0,))


def test_family_validation_errors():
    fam = builtin_counterexample(2)
    xx = point_index(2, ("x", "x"))
    broken = dict(fam.maps)
    broken[(2, 1, (0, 0))] = MonotoneMap(
        fam.posets[1], fam.posets[2], {e: xx for e in fam.posets[1].elements})
    with pytest.raises(InvalidInputError, match="functorial"):
        PolyadicApprox(fam.posets, broken, fam.labels, "exact")
    skewed = dict(fam.maps)
    skewed[(1, 1, (0,))] = MonotoneMap(
        fam.posets[1], fam.posets[1], {0: 0, 1: 0, 2: 0})
    with pytest.raises(InvalidInputError, match="identity"):
        PolyadicApprox(fam.posets, skewed, fam.labels, "exact")
    missing = {k: v for k, v in fam.maps.items() if k != (0, 1, ())}
    with pytest.raises(InvalidInputError, match="missing"):
        PolyadicApprox(fam.posets, missing, fam.labels, "exact")
    stray = dict(fam.maps)
    stray[(0, 3, ())] = MonotoneMap(fam.posets[0], fam.posets[0], {0: 0})
    with pytest.raises(InvalidInputError, match="unexpected"):
        PolyadicApprox(fam.posets, stray, fam.labels, "exact")
    with pytest.raises(InvalidInputError, match="labels"):
        PolyadicApprox(fam.posets, fam.maps, fam.labels[:2], "exact")
    with pytest.raises(InvalidInputError):
        PolyadicApprox([], {}, [], "exact")


THEORY = load_theory(three_models_path())


def test_approx_shipped_matches_closed_form():
    fam = approx_type_space(THEORY, 2, 3, 1)
    assert fam.params == (3, 1)
    assert [p.n for p in fam.posets] == [1, 3, 7]
    assert is_isomorphic(fam.posets[1], builtin_space(1)[0])
    assert is_isomorphic(fam.posets[2], builtin_space(2)[0])
    p1 = fam.posets[1]
    strict = {(a, b) for a in p1.elements for b in p1.elements
              if a != b and p1.leq(a, b)}
    assert strict == {(0, 2), (1, 2)}
    assert fam.labels[1] == ("m1(0)", "m2(0)", "m0(0)")


def test_approx_shipped_axiom_check():
    rep = check_polyadic_axioms(approx_type_space(THEORY, 2, 3, 1))
    assert rep.int1_failures == () and rep.int2_failures == ()
    spans = {span for span, _, _ in rep.amalgamation_failures}
    assert spans == {(0, 1, 1, (), ())}
    assert {(b, c) for _, b, c in rep.amalgamation_failures} == {
        ("m1(0)", "m2(0)"), ("m2(0)", "m1(0)")}


def test_approx_reindexing_precomposes():
    fam = approx_type_space(THEORY, 2, 3, 1)
    diag = fam.reindex(2, 1, (0, 0))
    p1, p2 = fam.posets[1], fam.posets[2]
    for e in p1.elements:
        img = diag.apply(e)
        # the diagonal of a one-variable type is below that type's square
        sq = fam.reindex(2, 2, (0, 0))
        assert p2.leq(img, img) and sq.table[img] == img
    drop = fam.reindex(0, 1, ())
    assert set(drop.table.values()) == {0}


def test_approx_empty_signature_distinguishes_emptiness():
    empty = Theory("empty", Signature([]), ())
    fam = approx_type_space(empty, 1, 2, 1)
    assert fam.posets[0].n == 2
    assert fam.labels[0] == ("m0()", "m1()")
    assert fam.posets[0].leq(0, 1) and not fam.posets[0].leq(1, 0)
    assert fam.posets[1].n == 1
    coarse = approx_type_space(empty, 1, 2, 0)
    assert coarse.posets[0].n == 1


def test_approx_inconsistent_theory_is_empty():
    bad = parse_theory("theory bad\nrel P/1\naxiom boom: true |- false\n")
    fam = approx_type_space(bad, 2, 3, 1)
    assert [p.n for p in fam.posets] == [0, 0, 0]
    assert check_polyadic_axioms(fam).ok


def test_approx_class_counts_monotone_in_bounds():
    counts = [approx_type_space(THEORY, 1, k, 1).posets[1].n for k in (1, 2, 3)]
    assert counts == [1, 3, 3]
    for seed in range(20):
        t = random_theory(seed)
        got = {}
        for k, d in ((1, 0), (1, 1), (2, 0), (2, 1)):
            try:
                got[(k, d)] = [p.n for p in approx_type_space(t, 1, k, d, max_basis=5000).posets]
            except ResourceLimitError:
                got[(k, d)] = None
        for n in range(2):
            if all(v is not None for v in got.values()):
                assert got[(1, 0)][n] <= got[(1, 1)][n] <= got[(2, 1)][n]
                assert got[(1, 0)][n] <= got[(2, 0)][n] <= got[(2, 1)][n]


def test_approx_basis_cap():
    with pytest.raises(ResourceLimitError, match="arity"):
        approx_type_space(THEORY, 2, 3, 1, max_basis=3)
    with pytest.raises(InvalidInputError):
        approx_type_space(THEORY, -1, 3, 1)
    with pytest.raises(InvalidInputError):
        approx_type_space(THEORY, 1, 3, 1, max_basis=0)


def test_dot_output():
    fam = builtin_counterexample(1)
    dot = approx_to_dot(fam)
    assert dot.startswith("digraph typespace {")
    assert dot.endswith("}\n")
    assert 'label="arity 0"' in dot and 'label="arity 1"' in dot
    assert "n1_1 -> n1_0;" in dot and "n1_2 -> n1_0;" in dot
    assert dot.count("->") == 2
