import itertools

import pytest

from polyadica import three_models_path
from polyadica.errors import InvalidInputError, ParseError, ResourceLimitError
from polyadica.structures import (
    FinStructure,
    PointedStructure,
    all_structures,
    canonical_form,
    check_theory,
    dump_structure,
    embeds_into,
    enumerate_models,
    evaluate,
    is_isomorphic,
    load_structure,
    structure_to_json,
)
from polyadica.theories import (
    Signature,
    Theory,
    load_theory,
    parse_formula,
    parse_sequent,
    parse_theory,
)

SIG = Signature([("P", 1), ("Q", 1)])
THEORY = load_theory(three_models_path())


def iso_oracle(s, t):
    # permutation search, independent of canonical_form
    if s.signature != t.signature or s.n != t.n:
        return False
    for perm in itertools.permutations(t.carrier):
        m = dict(zip(s.carrier, perm))
        if all(frozenset(tuple(m[x] for x in tup) for tup in s.relations[sym])
               == t.relations[sym] for sym in s.signature.symbols):
            return True
    return False


def models_oracle(theory, max_size):
    # raw enumeration + pairwise permutation dedup
    found = []
    for size in range(max_size + 1):
        for s in all_structures(theory.signature, size):
            if check_theory(theory, s):
                continue
            if not any(iso_oracle(s, m) for m in found):
                found.append(s)
    return found


def mk(carrier, p=(), q=()):
    return FinStructure(SIG, carrier, {"P": {(e,) for e in p},
                                       "Q": {(e,) for e in q}})


def test_structure_validation():
    s = mk((0, 1), p=(0,), q=(1,))
    assert s.n == 2 and s.carrier == (0, 1)
    assert s.holds("P", (0,)) and not s.holds("P", (1,))
    with pytest.raises(InvalidInputError):
        FinStructure(SIG, (0,), {"P": {(0, 1)}})
    with pytest.raises(InvalidInputError):
        FinStructure(SIG, (0,), {"P": {(3,)}})
    with pytest.raises(InvalidInputError):
        FinStructure(SIG, (0,), {"R": set()})
    with pytest.raises(InvalidInputError):
        FinStructure(SIG, (0, 0), {})


def test_structure_equality_ignores_input_order():
    a = FinStructure(SIG, (1, 0), {"P": [(0,), (1,)]})
    b = FinStructure(SIG, (0, 1), {"P": [(1,), (0,)], "Q": []})
    assert a == b and hash(a) == hash(b)


def test_pointed_structure():
    s = mk((0, 1), p=(0,))
    p = PointedStructure(s, {"x": 0})
    assert p.point == {"x": 0}
    with pytest.raises(InvalidInputError):
        PointedStructure(s, {"x": 5})


def test_evaluate_atoms_and_connectives():
    s = mk((0, 1), p=(0,), q=(1,))
    e = lambda text, env: evaluate(parse_formula(text, SIG),
                                   PointedStructure(s, env))
    assert e("true", {})
    assert not e("false", {})
    assert e("P(x)", {"x": 0})
    assert not e("P(x)", {"x": 1})
    assert e("x = y", {"x": 1, "y": 1})
    assert not e("x = y", {"x": 0, "y": 1})
    assert e("P(x) & Q(y)", {"x": 0, "y": 1})
    assert e("P(x) | Q(x)", {"x": 1})
    assert e("exists u. Q(u)", {})
    assert not e("exists u. P(u) & Q(u)", {})


def test_evaluate_requires_covering_point():
    s = mk((0,), p=(0,))
    with pytest.raises(InvalidInputError):
        evaluate(parse_formula("P(x)", SIG), PointedStructure(s, {}))


def test_evaluate_rejects_query_connectives():
    s = mk((0,), p=(0,))
    f = parse_formula("P(x) -> Q(x)", SIG, extended=True)
    with pytest.raises(InvalidInputError):
        evaluate(f, PointedStructure(s, {"x": 0}))
    g = parse_formula("forall u. P(u)", SIG, extended=True)
    with pytest.raises(InvalidInputError):
        evaluate(g, PointedStructure(s, {}))


def test_check_theory_empty_structure():
    t = Theory("t", SIG,
               (parse_sequent("true |- exists u. P(u)", SIG, name="a1"),))
    empty = FinStructure(SIG, (), {})
    assert check_theory(t, empty) == [("a1", {})]


def test_check_theory_mix_violation():
    s = mk((0, 1), p=(0,), q=(1,))
    violations = check_theory(THEORY, s)
    assert ("mix", {"x": 0, "y": 1}) in violations
    assert violations[0] == ("mix", {"x": 0, "y": 1})
    names = {name for name, _ in violations}
    assert "seed" in names  # no element carries both colors


def test_check_theory_accepts_models():
    core = mk((0,), p=(0,), q=(0,))
    assert check_theory(THEORY, core) == []
    assert check_theory(THEORY, mk((0, 1), p=(0, 1), q=(0,))) == []
    assert check_theory(THEORY, mk((0, 1), p=(0,), q=(0, 1))) == []


def test_violation_order_is_deterministic():
    s = mk((0, 1, 2), p=(0, 1, 2))
    first = check_theory(THEORY, s)
    assert first == check_theory(THEORY, s)
    assert all(list(env) == list(THEORY.axioms[i].context)
               for name, env in first
               for i in [ [a.name for a in THEORY.axioms].index(name) ])


def test_all_structures_counts():
    assert len(list(all_structures(SIG, 0))) == 1
    assert len(list(all_structures(SIG, 1))) == 4
    assert len(list(all_structures(SIG, 2))) == 16
    empty_sig = Signature([])
    assert len(list(all_structures(empty_sig, 2))) == 1


def test_enumerate_models_three_colors():
    models = enumerate_models(THEORY, 3)
    oracle = models_oracle(THEORY, 3)
    assert len(models) == len(oracle) == 3
    for m in models:
        assert any(iso_oracle(m, o) for o in oracle)
    expected = [mk((0,), p=(0,), q=(0,)),
                mk((0, 1), p=(0, 1), q=(1,)),
                mk((0, 1), p=(1,), q=(0, 1))]
    for m, e in zip(models, expected):
        assert is_isomorphic(m, e)


def test_enumerate_models_inconsistent_theory():
    t = Theory("t", SIG, (parse_sequent("true |- false", SIG, name="boom"),))
    assert enumerate_models(t, 2) == []


def test_enumerate_models_free_theory():
    empty_sig = Signature([])
    t = Theory("t", empty_sig, ())
    models = enumerate_models(t, 2)
    assert [m.n for m in models] == [0, 1, 2]


def test_enumerate_models_budget():
    big = Signature([("R", 2), ("S", 2), ("T", 2)])
    t = Theory("t", big, ())
    with pytest.raises(ResourceLimitError):
        enumerate_models(t, 3, max_raw=1000)


def test_canonical_form_relabels():
    s = FinStructure(SIG, (3, 7), {"P": {(7,)}, "Q": {(3,)}})
    c = canonical_form(s)
    assert c.carrier == (0, 1)
    assert canonical_form(c) == c
    assert iso_oracle(s, c)


def test_canonical_form_agrees_with_permutation_oracle():
    structures = list(all_structures(SIG, 2)) + list(all_structures(SIG, 3))[:40]
    for a in structures:
        for b in structures:
            assert (canonical_form(a) == canonical_form(b)) == iso_oracle(a, b)


def test_canonical_form_keeps_nullary_facts_on_empty_carrier():
    sig = Signature([("R", 0), ("P", 1)])
    marked = FinStructure(sig, (), {"R": {()}})
    plain = FinStructure(sig, (), {})
    assert canonical_form(marked).relations["R"] == frozenset({()})
    assert canonical_form(marked) == marked
    assert not is_isomorphic(marked, plain)
    t = Theory("nullary", sig, (parse_sequent("true |- R()", sig, "seed"),))
    models = enumerate_models(t, 1)
    empties = [m for m in models if m.n == 0]
    assert len(empties) == 1
    assert empties[0].relations["R"] == frozenset({()})


def test_is_isomorphic_binary_relation():
    sig = Signature([("R", 2)])
    path = FinStructure(sig, (0, 1, 2), {"R": {(0, 1), (1, 2)}})
    relabeled = FinStructure(sig, (0, 1, 2), {"R": {(2, 0), (0, 1)}})
    cycle = FinStructure(sig, (0, 1, 2), {"R": {(0, 1), (1, 2), (2, 0)}})
    assert is_isomorphic(path, relabeled)
    assert not is_isomorphic(path, cycle)


def test_embeds_into():
    small = mk((0,), p=(0,), q=(0,))
    big = mk((0, 1), p=(0, 1), q=(1,))
    assert embeds_into(small, big)  # send 0 to the PQ element
    assert not embeds_into(big, small)
    # induced, not just preserving: P-only element has no image in the core
    assert not embeds_into(mk((0,), p=(0,)), small)
    assert embeds_into(FinStructure(SIG, (), {}), small)


def test_embeds_into_reflects_relations():
    sig = Signature([("R", 2)])
    loop = FinStructure(sig, (0,), {"R": {(0, 0)}})
    bare = FinStructure(sig, (0, 1), {"R": {(0, 0)}})
    assert embeds_into(loop, bare)
    assert not embeds_into(FinStructure(sig, (0,), {"R": set()}), loop)


def test_dump_load_round_trip():
    s = mk((0, 1), p=(0,), q=(1,))
    text = dump_structure(s, ("a", "b"))
    assert text == "carrier: a b\nP: (a)\nQ: (b)\n"
    s2, names = load_structure(text, SIG)
    assert s2 == s and names == ("a", "b")


def test_dump_load_binary_and_empty():
    sig = Signature([("R", 2), ("Halt", 0)])
    s = FinStructure(sig, (0, 1), {"R": {(0, 1), (1, 1)}, "Halt": {()}})
    text = dump_structure(s)
    assert "Halt: ()" in text and "R: (0, 1) (1, 1)" in text
    s2, _ = load_structure(text, sig)
    assert s2 == s
    empty, names = load_structure("carrier:\n", sig)
    assert empty.n == 0 and names == ()


def test_load_structure_errors():
    with pytest.raises(ParseError):
        load_structure("P: (a)\n", SIG)  # carrier must come first
    with pytest.raises(ParseError):
        load_structure("carrier: a\nR: (a)\n", SIG)  # unknown relation
    with pytest.raises(ParseError):
        load_structure("carrier: a\nP: (b)\n", SIG)  # unknown element
    with pytest.raises(ParseError):
        load_structure("carrier: a a\n", SIG)
    with pytest.raises(ParseError):
        load_structure("carrier: a\nP: (a) junk\n", SIG)
    with pytest.raises(ParseError):
        load_structure("carrier: a\nP: (a)\nP: (a)\n", SIG)
    with pytest.raises(ParseError):
        load_structure("carrier: a\nP: (a, a)\n", SIG)  # arity


def test_structure_to_json_is_stable():
    s = mk((0, 1), p=(1, 0), q=(1,))
    assert structure_to_json(s) == {
        "carrier": [0, 1],
        "relations": {"P": [[0], [1]], "Q": [[1]]},
    }


def test_evaluate_matches_check_theory():
    # an axiom holds at an assignment iff lhs -> rhs pointwise
    s = mk((0, 1, 2), p=(0, 1), q=(1, 2))
    violations = set(map(lambda v: (v[0], tuple(sorted(v[1].items()))),
                         check_theory(THEORY, s)))
    for ax in THEORY.axioms:
        for values in itertools.product(s.carrier, repeat=len(ax.context)):
            env = dict(zip(ax.context, values))
            p = PointedStructure(s, env)
            bad = evaluate(ax.lhs, p) and not evaluate(ax.rhs, p)
            assert bad == ((ax.name, tuple(sorted(env.items()))) in violations)
