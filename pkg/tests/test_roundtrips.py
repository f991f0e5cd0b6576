"""Property tests: text formats are inverses and the pushout matches an
independent coequalizer oracle."""

import itertools

from hypothesis import given, settings, strategies as st

from polyadica.duality import upset_lattice
from polyadica.lattices import dump_lattice, load_lattice
from polyadica.posets import FinPoset, dump_poset, load_poset
from polyadica.structures import FinStructure, dump_structure, load_structure
from polyadica.theories import Signature, format_theory, parse_theory
from polyadica.typespace import compose_vars, pushout_of_span, var_maps
from theorygen import random_theory


@st.composite
def posets(draw, max_size=6):
    n = draw(st.integers(min_value=0, max_value=max_size))
    if n < 2:
        return FinPoset.from_pairs(range(n), [])
    idx = st.integers(min_value=0, max_value=n - 1)
    raw = draw(st.sets(st.tuples(idx, idx), max_size=2 * n))
    # keeping only ascending pairs makes the generating relation acyclic
    pairs = [(a, b) for a, b in raw if a < b]
    return FinPoset.from_pairs(range(n), pairs)


def same_order(p: FinPoset, q: FinPoset) -> bool:
    if p.n != q.n:
        return False
    return all(p.leq(p.elements[i], p.elements[j])
               == q.leq(q.elements[i], q.elements[j])
               for i in range(p.n) for j in range(p.n))


@given(posets())
def test_poset_text_round_trip(p):
    q, names = load_poset(dump_poset(p))
    assert names == tuple(str(e) for e in p.elements)
    assert same_order(p, q)


@given(posets(max_size=4))
def test_lattice_text_round_trip(p):
    lat = upset_lattice(p)
    back, _ = load_lattice(dump_lattice(lat))
    assert same_order(lat.poset, back.poset)
    assert back.poset.index(back.bot) == lat.poset.index(lat.bot)
    assert back.poset.index(back.top) == lat.poset.index(lat.top)


@st.composite
def signatures(draw):
    n = draw(st.integers(min_value=1, max_value=3))
    arities = draw(st.lists(st.integers(min_value=0, max_value=2),
                            min_size=n, max_size=n))
    return Signature([(name, a) for name, a in zip("PQR", arities)])


@st.composite
def structures(draw):
    sig = draw(signatures())
    n = draw(st.integers(min_value=0, max_value=3))
    relations = {}
    for sym in sig.symbols:
        tuples = list(itertools.product(range(n), repeat=sig.arities[sym]))
        relations[sym] = draw(st.sets(st.sampled_from(tuples))) if tuples else set()
    return FinStructure(sig, range(n), relations)


@given(structures())
def test_structure_text_round_trip(s):
    back, _ = load_structure(dump_structure(s), s.signature)
    assert back == s


@settings(max_examples=40)
@given(st.integers(min_value=0, max_value=10_000))
def test_theory_text_fixpoint(seed):
    text = format_theory(random_theory(seed))
    assert format_theory(parse_theory(text)) == text


def coequalizer_oracle(p, n, m, sigma1, sigma2):
    # smallest equivalence on the disjoint union n + m merging the leg images
    parent = list(range(n + m))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for k in range(p):
        a, b = find(sigma1[k]), find(n + sigma2[k])
        if a != b:
            parent[b] = a
    reps = []
    for x in range(n + m):
        r = find(x)
        if r not in reps:
            reps.append(r)
    number = {r: i for i, r in enumerate(reps)}
    return (len(reps),
            tuple(number[find(i)] for i in range(n)),
            tuple(number[find(n + j)] for j in range(m)))


@st.composite
def spans(draw):
    p = draw(st.integers(min_value=0, max_value=3))
    # nonempty legs need a nonempty target; otherwise allow the empty set
    n = draw(st.integers(min_value=1 if p else 0, max_value=4))
    m = draw(st.integers(min_value=1 if p else 0, max_value=4))
    sigma1 = tuple(draw(st.integers(min_value=0, max_value=n - 1)) for _ in range(p))
    sigma2 = tuple(draw(st.integers(min_value=0, max_value=m - 1)) for _ in range(p))
    return p, n, m, sigma1, sigma2


@given(spans())
def test_pushout_matches_coequalizer_oracle(span):
    p, n, m, sigma1, sigma2 = span
    q, tau1, tau2 = pushout_of_span(p, n, m, sigma1, sigma2)
    assert compose_vars(sigma1, tau1) == compose_vars(sigma2, tau2)
    assert set(tau1) | set(tau2) == set(range(q))
    assert (q, tau1, tau2) == coequalizer_oracle(p, n, m, sigma1, sigma2)


@given(st.data())
def test_var_map_composition_is_associative(data):
    sizes = [data.draw(st.integers(min_value=1, max_value=3)) for _ in range(4)]
    a, b, c, d = sizes
    f = data.draw(st.sampled_from(list(var_maps(a, b))))
    g = data.draw(st.sampled_from(list(var_maps(b, c))))
    h = data.draw(st.sampled_from(list(var_maps(c, d))))
    assert compose_vars(compose_vars(f, g), h) == compose_vars(f, compose_vars(g, h))
