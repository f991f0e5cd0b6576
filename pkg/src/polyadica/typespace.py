"""Families of type-space posets indexed by finite variable contexts.

A family assigns to each arity n a finite poset of n-types and to each
variable map sigma: n -> m a monotone reindexing of m-types to n-types
(precompose the point with sigma). The constructor checks contravariant
functoriality outright, so a PolyadicApprox that exists is one.

Two constructions ship: builtin_counterexample, a closed-form family whose
reindexings interpolate and are bounded yet which has no amalgamation, and
approx_type_space, which fingerprints pointed models of a coherent theory
against a generated formula basis. check_polyadic_axioms decides the three
space-side properties on any family, reporting every failure with witnesses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ConsistencyError, InvalidInputError, ResourceLimitError
from .posets import FinPoset, MonotoneMap, is_bounded
from .squares import LaxSquare, has_amalgamation, has_interpolation
from .structures import enumerate_models, satisfies
from .theories import And, Atom, Equal, Exists, Falsity, Theory, Truth


def var_maps(n: int, m: int):
    """All maps n -> m as length-n value tuples, in lexicographic order."""
    if n < 0 or m < 0:
        raise InvalidInputError("arities must be nonnegative")
    return itertools.product(range(m), repeat=n)


def compose_vars(sigma: tuple[int, ...], tau: tuple[int, ...]) -> tuple[int, ...]:
    """The composite n -> l of sigma: n -> m followed by tau: m -> l."""
    return tuple(tau[s] for s in sigma)


def pushout_of_span(p: int, n: int, m: int, sigma1: tuple[int, ...],
                    sigma2: tuple[int, ...]) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    """Pushout of the span n <- p -> m of finite sets.

    Returns (q, tau1, tau2) with tau1: n -> q and tau2: m -> q. Classes are
    numbered in first-touch order over the n part then the m part, so equal
    inputs always produce the identical triple.
    """
    if len(sigma1) != p or len(sigma2) != p:
        raise InvalidInputError("span legs must both have length p")
    parent = list(range(n + m))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(p):
        a, b = find(sigma1[i]), find(n + sigma2[i])
        if a != b:
            parent[max(a, b)] = min(a, b)
    rep_id: dict[int, int] = {}
    for i in range(n + m):
        r = find(i)
        if r not in rep_id:
            rep_id[r] = len(rep_id)
    tau1 = tuple(rep_id[find(i)] for i in range(n))
    tau2 = tuple(rep_id[find(n + j)] for j in range(m))
    return len(rep_id), tau1, tau2


class PolyadicApprox:
    """A finite family of type spaces with functorial reindexing.

    posets[n] is the space of n-types, labels[n][i] names its i-th point, and
    maps[(n, m, sigma)] is the reindexing along sigma: n -> m, a monotone map
    posets[m] -> posets[n]. params records how the family was built: "exact"
    for closed forms, or the (max_model_size, depth) pair of an approximation.
    """

    __slots__ = ("posets", "maps", "labels", "params")

    def __init__(self, posets, maps, labels, params):
        self.posets: tuple[FinPoset, ...] = tuple(posets)
        self.maps: dict[tuple[int, int, tuple[int, ...]], MonotoneMap] = dict(maps)
        self.labels: tuple[tuple[str, ...], ...] = tuple(tuple(ls) for ls in labels)
        self.params = params
        if not self.posets:
            raise InvalidInputError("a family needs at least the arity-0 space")
        if len(self.labels) != len(self.posets):
            raise InvalidInputError("labels must match spaces arity for arity")
        for n, space in enumerate(self.posets):
            if len(self.labels[n]) != space.n:
                raise InvalidInputError(
                    f"arity {n} has {space.n} points but {len(self.labels[n])} labels")
        top = self.max_arity
        expected = set()
        for n in range(top + 1):
            for m in range(top + 1):
                for sigma in var_maps(n, m):
                    key = (n, m, sigma)
                    expected.add(key)
                    h = self.maps.get(key)
                    if h is None:
                        raise InvalidInputError(f"missing reindexing for {key}")
                    if h.dom != self.posets[m] or h.cod != self.posets[n]:
                        raise InvalidInputError(f"reindexing for {key} has wrong endpoints")
        stray = set(self.maps) - expected
        if stray:
            raise InvalidInputError(f"unexpected reindexing key {sorted(stray)[0]}")
        self._check_functorial(top)

    def _check_functorial(self, top: int) -> None:
        for n in range(top + 1):
            ident = self.maps[(n, n, tuple(range(n)))]
            if any(ident.table[e] != e for e in self.posets[n].elements):
                raise InvalidInputError(f"reindexing along the identity on {n} is not the identity")
        for n in range(top + 1):
            for m in range(top + 1):
                for sigma in var_maps(n, m):
                    first = self.maps[(n, m, sigma)]
                    for l in range(top + 1):
                        for tau in var_maps(m, l):
                            second = self.maps[(m, l, tau)]
                            composite = self.maps[(n, l, compose_vars(sigma, tau))]
                            if any(composite.table[e] != first.table[second.table[e]]
                                   for e in self.posets[l].elements):
                                raise InvalidInputError(
                                    f"reindexing is not functorial at sigma={sigma} tau={tau}")

    @property
    def max_arity(self) -> int:
        return len(self.posets) - 1

    def space(self, n: int) -> FinPoset:
        if not 0 <= n <= self.max_arity:
            raise InvalidInputError(f"arity {n} outside 0..{self.max_arity}")
        return self.posets[n]

    def reindex(self, n: int, m: int, sigma: tuple[int, ...]) -> MonotoneMap:
        try:
            return self.maps[(n, m, tuple(sigma))]
        except KeyError:
            raise InvalidInputError(f"no reindexing for {(n, m, tuple(sigma))}") from None


_LETTER_LEQ = frozenset([("x", "x"), ("y", "y"), ("z", "z"), ("y", "x"), ("z", "x")])


def _builtin_points(n: int) -> list[tuple[str, ...]]:
    pts = set(itertools.product("xy", repeat=n)) | set(itertools.product("xz", repeat=n))
    return sorted(pts)


def _builtin_leq(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    if any((s, t) not in _LETTER_LEQ for s, t in zip(a, b)):
        return False
    # coordinates equal in the smaller tuple must stay equal in the larger
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if a[i] == a[j] and b[i] != b[j]:
                return False
    return True


def builtin_space(n: int) -> tuple[FinPoset, tuple[str, ...]]:
    """The arity-n poset of the built-in family, with its point labels."""
    if n < 0:
        raise InvalidInputError("arity must be nonnegative")
    pts = _builtin_points(n)
    pairs = [(i, j) for i, a in enumerate(pts) for j, b in enumerate(pts)
             if _builtin_leq(a, b)]
    labels = tuple(",".join(t) if t else "()" for t in pts)
    return FinPoset(range(len(pts)), pairs), labels


def builtin_counterexample(max_arity: int = 2) -> PolyadicApprox:
    """A family with interpolation and bounded reindexing but no amalgamation.

    Three letters ordered y < x and z < x; the arity-n space holds the tuples
    over {x, y} together with those over {x, z}, ordered coordinatewise with
    the extra clause that coordinates equal in the lower tuple stay equal in
    the upper one. Reindexing selects coordinates. The one-variable points y
    and z agree at arity 0 yet no pair in the arity-2 space restricts to both,
    which is exactly the failure check_polyadic_axioms reports.
    """
    if max_arity < 0:
        raise InvalidInputError("max_arity must be nonnegative")
    points = [_builtin_points(n) for n in range(max_arity + 1)]
    spaces = [builtin_space(n) for n in range(max_arity + 1)]
    posets = [space for space, _ in spaces]
    labels = [labs for _, labs in spaces]
    index = [{t: i for i, t in enumerate(pts)} for pts in points]
    maps = {}
    for n in range(max_arity + 1):
        for m in range(max_arity + 1):
            for sigma in var_maps(n, m):
                table = {j: index[n][tuple(t[s] for s in sigma)]
                         for j, t in enumerate(points[m])}
                maps[(n, m, sigma)] = MonotoneMap(posets[m], posets[n], table)
    return PolyadicApprox(posets, maps, labels, "exact")


@dataclass(frozen=True)
class AxiomCheck:
    """Result of check_polyadic_axioms: every failure, with witnesses.

    Failure entries carry the span (p, n, m, sigma1, sigma2) and the labels
    of the offending pair of points; int2_failures carry the unbounded map's
    (n, m, sigma). Spans whose pushout exceeds the family's arity bound are
    skipped and counted rather than silently ignored.
    """

    span_bound: int
    squares_checked: int
    maps_checked: int
    skipped_spans: int
    int1_failures: tuple
    int2_failures: tuple
    amalgamation_failures: tuple

    @property
    def ok(self) -> bool:
        return not (self.int1_failures or self.int2_failures or self.amalgamation_failures)

    def lines(self) -> list[str]:
        def verdict(failures):
            return "ok" if not failures else f"{len(failures)} failures"

        skipped = f", {self.skipped_spans} spans skipped" if self.skipped_spans else ""
        return [
            f"interpolation over pushout squares: {verdict(self.int1_failures)}"
            f" ({self.squares_checked} squares{skipped})",
            f"bounded reindexing: {verdict(self.int2_failures)} ({self.maps_checked} maps)",
            f"amalgamation: {verdict(self.amalgamation_failures)}"
            f" ({self.squares_checked} squares{skipped})",
        ]


def check_polyadic_axioms(fam: PolyadicApprox, span_bound: int | None = None) -> AxiomCheck:
    """Decide interpolation, boundedness, and amalgamation for a family.

    Squares are the images of pushouts of spans sigma1: p -> n, sigma2: p -> m
    with p, n, m <= span_bound (default: the family's arity bound); spans whose
    pushout exceeds the family's bound are counted as skipped. Boundedness is
    checked for every reindexing in the family. All failing pairs are
    collected, and each square's verdicts are cross-checked against the
    standalone square deciders.
    """
    top = fam.max_arity
    if span_bound is None:
        span_bound = top
    if not 0 <= span_bound <= top:
        raise InvalidInputError(f"span_bound must lie in 0..{top}")
    int2 = []
    maps_checked = 0
    for n in range(top + 1):
        for m in range(top + 1):
            for sigma in var_maps(n, m):
                maps_checked += 1
                if not is_bounded(fam.maps[(n, m, sigma)]):
                    int2.append((n, m, sigma))
    int1 = []
    amal = []
    squares = 0
    skipped = 0
    for p in range(span_bound + 1):
        for n in range(span_bound + 1):
            for sigma1 in var_maps(p, n):
                for m in range(span_bound + 1):
                    for sigma2 in var_maps(p, m):
                        q, tau1, tau2 = pushout_of_span(p, n, m, sigma1, sigma2)
                        if q > top:
                            skipped += 1
                            continue
                        squares += 1
                        square = LaxSquare(
                            a=fam.posets[q], b=fam.posets[n], c=fam.posets[m],
                            d=fam.posets[p],
                            f=fam.maps[(n, q, tau1)], g=fam.maps[(m, q, tau2)],
                            u=fam.maps[(p, n, sigma1)], v=fam.maps[(p, m, sigma2)])
                        fails_i, fails_a = _square_failures(fam, p, q, square)
                        if bool(fails_i) == bool(has_interpolation(square)):
                            raise ConsistencyError(
                                "interpolation deciders disagree on a type-space square")
                        if bool(fails_a) == has_amalgamation(square):
                            raise ConsistencyError(
                                "amalgamation deciders disagree on a type-space square")
                        span = (p, n, m, sigma1, sigma2)
                        int1 += [(span, fam.labels[n][b], fam.labels[m][c])
                                 for b, c in fails_i]
                        amal += [(span, fam.labels[n][b], fam.labels[m][c])
                                 for b, c in fails_a]
    return AxiomCheck(span_bound=span_bound, squares_checked=squares,
                      maps_checked=maps_checked, skipped_spans=skipped,
                      int1_failures=tuple(int1), int2_failures=tuple(int2),
                      amalgamation_failures=tuple(amal))


def _square_failures(fam, p, q, square):
    """Every (b, c) pair failing interpolation, resp. amalgamation."""
    fails_i = []
    fails_a = []
    bb, cc, aa = square.b, square.c, square.a
    for b in bb.elements:
        ub = square.u.apply(b)
        for c in cc.elements:
            vc = square.v.apply(c)
            if fam.posets[p].leq(ub, vc):
                if not any(bb.leq(b, square.f.apply(a)) and cc.leq(square.g.apply(a), c)
                           for a in aa.elements):
                    fails_i.append((b, c))
            if ub == vc:
                if not any(square.f.apply(a) == b and square.g.apply(a) == c
                           for a in aa.elements):
                    fails_a.append((b, c))
    return fails_i, fails_a


def approx_type_space(t: Theory, max_arity: int, max_model_size: int, depth: int,
                      max_basis: int = 20_000) -> PolyadicApprox:
    """Approximate a coherent theory's family of type spaces.

    Points of the arity-n space are classes of n-pointed models of size at
    most max_model_size, identified exactly when they satisfy the same basis
    formulas: atoms and equalities over the point variables v0..v{n-1}, plus
    existential extensions to the given quantifier depth, closed under and/or
    and deduplicated semantically. The order is fingerprint inclusion, and
    reindexing precomposes the point tuple. Raising depth or model size only
    ever splits classes, never merges them. max_basis caps the number of
    semantically distinct basis formulas per arity.
    """
    if max_arity < 0 or max_model_size < 0 or depth < 0:
        raise InvalidInputError("max_arity, max_model_size, and depth must be nonnegative")
    if max_basis <= 0:
        raise InvalidInputError("max_basis must be positive")
    models = enumerate_models(t, max_model_size)
    sig = t.signature

    ctx_list: dict[int, list] = {}
    ctx_index: dict[int, dict] = {}

    def contexts(a: int) -> list:
        if a not in ctx_list:
            out = []
            for mi, struct in enumerate(models):
                out.extend((mi, vals)
                           for vals in itertools.product(struct.carrier, repeat=a))
            ctx_list[a] = out
            ctx_index[a] = {c: i for i, c in enumerate(out)}
        return ctx_list[a]

    # The basis nominally closes the generators under and/or, but nothing ever
    # looks at that closure directly: the point partition and its inclusion
    # order are already determined by the generators (a context lands in an
    # and/or combination iff its generator memberships say so), and the only
    # other consumer is the existential one variable down, which distributes
    # over or. So each layer materializes generators plus their meet-closure
    # only; joins stay implicit.
    gens_memo: dict[tuple[int, int], list] = {}
    meets_memo: dict[tuple[int, int], list] = {}

    def gens(a: int, e: int) -> list:
        """Generators at arity a, quantifier depth e, as (mask, formula) pairs."""
        if (a, e) in gens_memo:
            return gens_memo[(a, e)]
        cs = contexts(a)
        vs = [f"v{i}" for i in range(a)]
        items: dict[int, object] = {}

        def add(form) -> None:
            mask = 0
            for i, (mi, vals) in enumerate(cs):
                if satisfies(models[mi], form, dict(zip(vs, vals))):
                    mask |= 1 << i
            items.setdefault(mask, form)
            if len(items) > max_basis:
                raise ResourceLimitError(
                    f"formula basis at arity {a} exceeded {max_basis} classes")

        add(Truth())
        add(Falsity())
        for sym in sig.symbols:
            for args in itertools.product(vs, repeat=sig.arities[sym]):
                add(Atom(sym, args))
        for i in range(a):
            for j in range(i + 1, a):
                add(Equal(vs[i], vs[j]))
        if e > 0:
            deeper = meet_closure(a + 1, e - 1)
            below = ctx_index[a + 1]
            for dmask, dform in deeper:
                mask = 0
                for i, (mi, vals) in enumerate(cs):
                    if any(dmask >> below[(mi, vals + (w,))] & 1
                           for w in models[mi].carrier):
                        mask |= 1 << i
                items.setdefault(mask, Exists(f"v{a}", dform))
                if len(items) > max_basis:
                    raise ResourceLimitError(
                        f"formula basis at arity {a} exceeded {max_basis} classes")
        out = sorted(items.items(), key=lambda kv: kv[0])
        gens_memo[(a, e)] = out
        return out

    def meet_closure(a: int, e: int) -> list:
        if (a, e) in meets_memo:
            return meets_memo[(a, e)]
        closed: dict[int, object] = {}
        for gmask, gform in gens(a, e):
            fresh = [(gmask, gform)]
            fresh.extend((cmask & gmask, And(cform, gform))
                         for cmask, cform in closed.items())
            for mask, form in fresh:
                if mask not in closed:
                    closed[mask] = form
                    if len(closed) > max_basis:
                        raise ResourceLimitError(
                            f"formula basis at arity {a} exceeded {max_basis} classes")
        out = sorted(closed.items(), key=lambda kv: kv[0])
        meets_memo[(a, e)] = out
        return out

    posets = []
    labels = []
    class_of: dict[int, list[int]] = {}
    reps: dict[int, list] = {}
    for n in range(max_arity + 1):
        layer = gens(n, depth)
        cs = contexts(n)
        fps = []
        for i in range(len(cs)):
            fps.append(frozenset(k for k, (mask, _) in enumerate(layer)
                                 if mask >> i & 1))
        uniq = sorted(set(fps), key=lambda fp: (len(fp), sorted(fp)))
        cid = {fp: k for k, fp in enumerate(uniq)}
        class_of[n] = [cid[fp] for fp in fps]
        pairs = [(i, j) for i, fa in enumerate(uniq)
                 for j, fb in enumerate(uniq) if fa <= fb]
        posets.append(FinPoset(range(len(uniq)), pairs))
        rep: list = [None] * len(uniq)
        lab: list = [None] * len(uniq)
        for i, fp in enumerate(fps):
            k = cid[fp]
            if rep[k] is None:
                mi, vals = cs[i]
                rep[k] = (mi, vals)
                lab[k] = f"m{mi}({','.join(map(str, vals))})"
        reps[n] = rep
        labels.append(tuple(lab))

    maps = {}
    for n in range(max_arity + 1):
        contexts(n)
        for m in range(max_arity + 1):
            for sigma in var_maps(n, m):
                table = {}
                for k, (mi, vals) in enumerate(reps[m]):
                    image = (mi, tuple(vals[s] for s in sigma))
                    table[k] = class_of[n][ctx_index[n][image]]
                maps[(n, m, sigma)] = MonotoneMap(posets[m], posets[n], table)
    return PolyadicApprox(posets, maps, labels, (max_model_size, depth))


def _covers(p: FinPoset) -> list[tuple[int, int]]:
    out = []
    for a in p.elements:
        for b in p.elements:
            if a == b or not p.leq(a, b):
                continue
            if not any(c != a and c != b and p.leq(a, c) and p.leq(c, b)
                       for c in p.elements):
                out.append((a, b))
    return out


def approx_to_dot(fam: PolyadicApprox) -> str:
    """GraphViz source: one cluster per arity, edges are covering pairs."""
    lines = ["digraph typespace {", "  rankdir=BT;", "  node [shape=box];"]
    for n, space in enumerate(fam.posets):
        lines.append(f"  subgraph cluster_{n} {{")
        lines.append(f'    label="arity {n}";')
        for e in space.elements:
            text = fam.labels[n][e].replace('"', '\\"')
            lines.append(f'    n{n}_{e} [label="{text}"];')
        for a, b in _covers(space):
            lines.append(f"    n{n}_{a} -> n{n}_{b};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
