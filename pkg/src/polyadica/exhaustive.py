"""Exhaustive small-world enumeration shared by tests and the selftest CLI.

Everything here is deliberately brute force: these are the oracles the rest of
the library is checked against, so they must stay independently simple. The
suite functions at the bottom return reports instead of asserting, so the CLI
and the test suite can share one implementation of each sweep.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from .duality import (
    check_frobenius_bounded,
    hom_from_dual,
    openness_of_dual,
    pushout,
    spectrum,
    upset_lattice,
)
from .errors import ConsistencyError, ResourceLimitError
from .lattices import (
    FinDistLattice,
    LatticeHom,
    frobenius_reciprocity_holds,
    is_frobenius,
    is_heyting_hom,
)
from .posets import FinPoset, MonotoneMap, canonical_form, is_isomorphic
from .squares import (
    UF_LE_VG,
    VG_LE_UF,
    LaxSquare,
    beck_chevalley_holds,
    check_selfduality,
    has_interpolation,
)


@lru_cache(maxsize=None)
def all_posets(size: int) -> tuple[FinPoset, ...]:
    """All posets with `size` elements, one per isomorphism class, ids 0..size-1."""
    if size == 0:
        return (FinPoset((), ()),)
    seen: dict[FinPoset, FinPoset] = {}
    idx = range(size)
    strict_pairs = [(i, j) for i in idx for j in idx if i != j]
    for bits in range(1 << len(strict_pairs)):
        up = [1 << i for i in idx]
        for k, (i, j) in enumerate(strict_pairs):
            if bits >> k & 1:
                up[i] |= 1 << j
        # transitivity and antisymmetry, directly on masks
        ok = True
        for i in idx:
            m = up[i]
            while m and ok:
                low = m & -m
                j = low.bit_length() - 1
                if j != i and up[j] >> i & 1:
                    ok = False
                if up[j] & ~up[i]:
                    ok = False
                m ^= low
            if not ok:
                break
        if not ok:
            continue
        pairs = [(i, j) for i in idx for j in idx if up[i] >> j & 1]
        p = FinPoset(idx, pairs, _trusted=True)
        key = canonical_form(p)
        if key not in seen:
            seen[key] = key
    return tuple(sorted(seen.values(), key=lambda p: p._up))


def posets_upto(max_size: int) -> list[FinPoset]:
    out: list[FinPoset] = []
    for k in range(max_size + 1):
        out.extend(all_posets(k))
    return out


def all_monotone_maps(dom: FinPoset, cod: FinPoset) -> list[MonotoneMap]:
    """Every monotone map dom -> cod (empty domain gives the unique empty map)."""
    out = []
    for values in itertools.product(cod.elements, repeat=dom.n):
        table = dict(zip(dom.elements, values))
        ok = True
        for i in range(dom.n):
            a = dom.elements[i]
            m = dom.up_mask(i)
            while m:
                low = m & -m
                b = dom.elements[low.bit_length() - 1]
                if not cod.leq(table[a], table[b]):
                    ok = False
                    break
                m ^= low
            if not ok:
                break
        if ok:
            out.append(MonotoneMap(dom, cod, table))
    return out


@lru_cache(maxsize=None)
def all_lattices(dual_size: int) -> tuple[FinDistLattice, ...]:
    """All distributive lattices whose dual poset has `dual_size` points.

    One per isomorphism class: every finite distributive lattice is the up-set
    lattice of its poset of join-irreducibles, so walking the poset catalog
    walks the lattice catalog.
    """
    return tuple(upset_lattice(p) for p in all_posets(dual_size))


def lattices_upto(max_dual_size: int) -> list[FinDistLattice]:
    out: list[FinDistLattice] = []
    for k in range(max_dual_size + 1):
        out.extend(all_lattices(k))
    return out


def all_homs(dom: FinDistLattice, cod: FinDistLattice) -> list[LatticeHom]:
    """Every lattice hom dom -> cod, enumerated through dual monotone maps.

    Going through the duals keeps this polynomial in practice: homs correspond
    to monotone maps spec(cod) -> spec(dom), and dual posets are exponentially
    smaller than their lattices.
    """
    sp_dom, _ = spectrum(dom)
    sp_cod, _ = spectrum(cod)
    return [hom_from_dual(phi, dom, cod)
            for phi in all_monotone_maps(sp_cod, sp_dom)]


def all_heyting_homs(dom: FinDistLattice, cod: FinDistLattice) -> list[LatticeHom]:
    return [h for h in all_homs(dom, cod) if is_heyting_hom(h)]


def _hom_pool(lats: list[FinDistLattice]) -> dict[tuple[int, int], list[LatticeHom]]:
    pool = {}
    for i, dom in enumerate(lats):
        for j, cod in enumerate(lats):
            pool[(i, j)] = all_homs(dom, cod)
    return pool


def lax_squares_exhaustive(max_dual_size: int) -> Iterator[LaxSquare]:
    """Every lax square (normalized orientation) over the lattice catalog."""
    lats = lattices_upto(max_dual_size)
    pool = _hom_pool(lats)
    rng = range(len(lats))
    for ia, ib, ic, id_ in itertools.product(rng, repeat=4):
        a, d = lats[ia], lats[id_]
        for f in pool[(ia, ib)]:
            for g in pool[(ia, ic)]:
                for u in pool[(ib, id_)]:
                    uf = {x: u.table[f.table[x]] for x in a.elements}
                    for v in pool[(ic, id_)]:
                        if all(d.leq(uf[x], v.table[g.table[x]])
                               for x in a.elements):
                            yield LaxSquare(a=a, b=lats[ib], c=lats[ic], d=d,
                                            f=f, g=g, u=u, v=v)


def lax_squares_sampled(dual_size: int, count: int, seed: int) -> Iterator[LaxSquare]:
    """`count` pseudo-random lax squares with corner duals of exactly `dual_size`.

    Deterministic for a fixed seed. Candidates that are lax in the flipped
    direction only are kept with the flipped orientation, so downstream
    normalization gets exercised too.
    """
    lats = list(all_lattices(dual_size))
    pool = _hom_pool(lats)
    rng = random.Random(seed)
    produced = 0
    attempts = 0
    while produced < count:
        attempts += 1
        if attempts > 200 * count + 1000:
            raise ResourceLimitError("sampling lax squares is rejecting too much")
        ia, ib, ic, id_ = (rng.randrange(len(lats)) for _ in range(4))
        f = rng.choice(pool[(ia, ib)])
        g = rng.choice(pool[(ia, ic)])
        u = rng.choice(pool[(ib, id_)])
        v = rng.choice(pool[(ic, id_)])
        a, d = lats[ia], lats[id_]
        uf = {x: u.table[f.table[x]] for x in a.elements}
        vg = {x: v.table[g.table[x]] for x in a.elements}
        if all(d.leq(uf[x], vg[x]) for x in a.elements):
            orientation = UF_LE_VG
        elif all(d.leq(vg[x], uf[x]) for x in a.elements):
            orientation = VG_LE_UF
        else:
            continue
        produced += 1
        yield LaxSquare(a=a, b=lats[ib], c=lats[ic], d=d,
                        f=f, g=g, u=u, v=v, orientation=orientation)


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def line(self) -> str:
        verdict = "ok" if self.ok else f"FAILED ({len(self.failures)})"
        return f"{self.name}: {self.cases} cases, {verdict}"


def _describe_square(s: LaxSquare) -> str:
    return (f"corners n=({s.a.n},{s.b.n},{s.c.n},{s.d.n}) "
            f"f={s.f.table} g={s.g.table} u={s.u.table} v={s.v.table} "
            f"[{s.orientation}]")


def duality_round_trip_suite(max_size: int = 4) -> SuiteReport:
    """Both round trips, exhaustively up to `max_size` dual points."""
    report = SuiteReport("duality round trips")
    for p in posets_upto(max_size):
        report.cases += 1
        sp, _ = spectrum(upset_lattice(p))
        if not is_isomorphic(sp, p):
            report.failures.append(f"poset round trip broke at {p!r}")
    for lat in lattices_upto(max_size):
        report.cases += 1
        sp, wit = spectrum(lat)
        ul = upset_lattice(sp)
        table = {a: sum(1 << x for x in wit.unit[a]) for a in lat.elements}
        try:
            LatticeHom(lat, ul, table)
        except Exception as exc:
            report.failures.append(f"unit is not a hom on lattice n={lat.n}: {exc}")
            continue
        if len(set(table.values())) != lat.n or ul.n != lat.n:
            report.failures.append(f"unit is not bijective on lattice n={lat.n}")
    return report


def beck_chevalley_suite(squares: Iterable[LaxSquare]) -> SuiteReport:
    """Adjoint commutation must agree with the interpolation decider everywhere."""
    report = SuiteReport("beck-chevalley vs interpolation")
    for s in squares:
        report.cases += 1
        try:
            beck_chevalley_holds(s)
        except ConsistencyError as exc:
            report.failures.append(f"{exc}: {_describe_square(s)}")
    return report


def selfduality_suite(squares: Iterable[LaxSquare]) -> SuiteReport:
    """Interpolation must survive dualizing the square, in both directions."""
    report = SuiteReport("square self-duality")
    for s in squares:
        report.cases += 1
        try:
            check_selfduality(s)
        except ConsistencyError as exc:
            report.failures.append(f"{exc}: {_describe_square(s)}")
    return report


def frobenius_suite(max_dual_size: int = 3) -> SuiteReport:
    """Frobenius == bounded dual == reciprocity law, over the whole hom catalog."""
    report = SuiteReport("frobenius characterizations")
    lats = lattices_upto(max_dual_size)
    for dom in lats:
        for cod in lats:
            for h in all_homs(dom, cod):
                report.cases += 1
                try:
                    frob = check_frobenius_bounded(h)
                    openness_of_dual(h)
                except ConsistencyError as exc:
                    report.failures.append(f"{exc}: hom {h.table}")
                    continue
                if frobenius_reciprocity_holds(h) != frob:
                    report.failures.append(
                        f"reciprocity law disagrees on hom {h.table}")
    return report


def heyting_pushout_suite(max_dual_size: int = 3) -> SuiteReport:
    """Pushouts of spans of Heyting homs must all have interpolation."""
    report = SuiteReport("heyting pushout interpolation")
    lats = lattices_upto(max_dual_size)
    heyting = {}
    for i, dom in enumerate(lats):
        for j, cod in enumerate(lats):
            heyting[(i, j)] = all_heyting_homs(dom, cod)
    rng = range(len(lats))
    for ia, ib, ic in itertools.product(rng, repeat=3):
        for f in heyting[(ia, ib)]:
            for g in heyting[(ia, ic)]:
                report.cases += 1
                d, u, v = pushout(f, g)
                s = LaxSquare(a=lats[ia], b=lats[ib], c=lats[ic], d=d,
                              f=f, g=g, u=u, v=v)
                w = has_interpolation(s)
                if not w:
                    report.failures.append(
                        f"pushout square failed at {w.failure}: "
                        f"f={f.table} g={g.table}")
    return report


def frobenius_projection_suite(max_dual_size: int = 2) -> SuiteReport:
    """is_frobenius must agree with interpolation over every projection square.

    Redundant with the definition on purpose: is_frobenius is implemented via
    projection squares, so this sweep mostly guards the reciprocity shortcut
    and the sublattice plumbing against each other.
    """
    report = SuiteReport("frobenius projection squares")
    lats = lattices_upto(max_dual_size)
    for dom in lats:
        for cod in lats:
            for h in all_homs(dom, cod):
                report.cases += 1
                if is_frobenius(h) != frobenius_reciprocity_holds(h):
                    report.failures.append(f"disagreement on hom {h.table}")
    return report
