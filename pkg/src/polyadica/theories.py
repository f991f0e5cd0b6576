"""Syntax for single-sorted coherent theories: AST, parser, substitution.

The object language is the coherent fragment (truth, falsity, atoms, equality,
and, or, exists). Implication and universal quantification exist in the AST
only for tree-forcing queries; the theory parser rejects them, the query
parser (`parse_formula` with extended=True) accepts them.

Relation symbols start uppercase, variables lowercase. Axiom contexts are the
free variables of both sides in order of first appearance, left side first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import InvalidInputError, ParseError

RESERVED = frozenset(["theory", "rel", "axiom", "true", "false", "exists", "forall"])

_VAR_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_REL_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Falsity:
    pass


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Equal:
    left: str
    right: str


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Implies:
    # query-only connective: not part of the coherent object language
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    # query-only quantifier
    var: str
    body: "Formula"


Formula = Union[Truth, Falsity, Atom, Equal, And, Or, Exists, Implies, Forall]

COHERENT_NODES = (Truth, Falsity, Atom, Equal, And, Or, Exists)


class Signature:
    """Relation symbols with arities; no function symbols or constants."""

    __slots__ = ("symbols", "arities")

    def __init__(self, relations: "Iterator[tuple[str, int]] | list[tuple[str, int]]"):
        symbols = []
        arities = {}
        for name, arity in relations:
            if not _REL_RE.match(name):
                raise InvalidInputError(
                    f"relation name {name!r} must start uppercase")
            if name in arities:
                raise InvalidInputError(f"duplicate relation {name!r}")
            if arity < 0:
                raise InvalidInputError(f"negative arity for {name!r}")
            symbols.append(name)
            arities[name] = arity
        self.symbols = tuple(symbols)
        self.arities = arities

    def extend(self, name: str, arity: int) -> "Signature":
        return Signature(list(zip(self.symbols, (self.arities[s] for s in self.symbols)))
                         + [(name, arity)])

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Signature) and self.symbols == other.symbols
                and self.arities == other.arities)

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        inner = ", ".join(f"{s}/{self.arities[s]}" for s in self.symbols)
        return f"Signature({inner})"


@dataclass(frozen=True)
class Sequent:
    name: str
    context: tuple[str, ...]
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Theory:
    name: str
    signature: Signature
    axioms: tuple[Sequent, ...]


def free_vars(f: Formula) -> tuple[str, ...]:
    """Free variables in order of first appearance."""
    seen: list[str] = []

    def walk(g: Formula, bound: frozenset[str]) -> None:
        if isinstance(g, Atom):
            for v in g.args:
                if v not in bound and v not in seen:
                    seen.append(v)
        elif isinstance(g, Equal):
            for v in (g.left, g.right):
                if v not in bound and v not in seen:
                    seen.append(v)
        elif isinstance(g, (And, Or, Implies)):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bound | {g.var})

    walk(f, frozenset())
    return tuple(seen)


def formula_depth(f: Formula) -> int:
    """Quantifier nesting depth."""
    if isinstance(f, (Truth, Falsity, Atom, Equal)):
        return 0
    if isinstance(f, (And, Or, Implies)):
        return max(formula_depth(f.left), formula_depth(f.right))
    if isinstance(f, (Exists, Forall)):
        return 1 + formula_depth(f.body)
    raise InvalidInputError(f"not a formula: {f!r}")


def check_formula(f: Formula, sig: Signature, context: "frozenset[str] | set[str]",
                  extended: bool = False) -> None:
    """Well-formedness: known symbols, matching arities, bound variables only."""
    if isinstance(f, (Truth, Falsity)):
        return
    if isinstance(f, Atom):
        if f.symbol not in sig.arities:
            raise InvalidInputError(f"unknown relation {f.symbol!r}")
        if len(f.args) != sig.arities[f.symbol]:
            raise InvalidInputError(
                f"{f.symbol} expects {sig.arities[f.symbol]} arguments, "
                f"got {len(f.args)}")
        for v in f.args:
            if v not in context:
                raise InvalidInputError(f"unbound variable {v!r}")
        return
    if isinstance(f, Equal):
        for v in (f.left, f.right):
            if v not in context:
                raise InvalidInputError(f"unbound variable {v!r}")
        return
    if isinstance(f, (And, Or)):
        check_formula(f.left, sig, context, extended)
        check_formula(f.right, sig, context, extended)
        return
    if isinstance(f, Implies):
        if not extended:
            raise InvalidInputError("implication is only allowed in query formulas")
        check_formula(f.left, sig, context, extended)
        check_formula(f.right, sig, context, extended)
        return
    if isinstance(f, Exists):
        check_formula(f.body, sig, set(context) | {f.var}, extended)
        return
    if isinstance(f, Forall):
        if not extended:
            raise InvalidInputError(
                "universal quantification is only allowed in query formulas")
        check_formula(f.body, sig, set(context) | {f.var}, extended)
        return
    raise InvalidInputError(f"not a formula: {f!r}")


def _fresh(base: str, forbidden: set[str]) -> str:
    if base not in forbidden:
        return base
    k = 2
    while f"{base}_{k}" in forbidden:
        k += 1
    return f"{base}_{k}"


def substitute(f: Formula, sigma: dict[str, str]) -> Formula:
    """Capture-avoiding simultaneous substitution of variables for variables.

    Functorial: substitute(f, id) == f up to alpha, and composing substitutions
    composes the maps. Bound variables are renamed deterministically
    (base, base_2, base_3, ...) when they would capture an incoming variable.
    """
    if isinstance(f, (Truth, Falsity)):
        return f
    if isinstance(f, Atom):
        return Atom(f.symbol, tuple(sigma.get(v, v) for v in f.args))
    if isinstance(f, Equal):
        return Equal(sigma.get(f.left, f.left), sigma.get(f.right, f.right))
    if isinstance(f, And):
        return And(substitute(f.left, sigma), substitute(f.right, sigma))
    if isinstance(f, Or):
        return Or(substitute(f.left, sigma), substitute(f.right, sigma))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, sigma), substitute(f.right, sigma))
    if isinstance(f, (Exists, Forall)):
        inner = {v: w for v, w in sigma.items() if v != f.var}
        incoming = {inner.get(v, v) for v in free_vars(f.body) if v != f.var}
        var = _fresh(f.var, incoming)
        if var != f.var:
            inner[f.var] = var
        body = substitute(f.body, inner)
        return type(f)(var, body)
    raise InvalidInputError(f"not a formula: {f!r}")


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    return _alpha_canon(f, {}, 0) == _alpha_canon(g, {}, 0)


def _alpha_canon(f: Formula, rename: dict[str, str], depth: int):
    if isinstance(f, (Truth, Falsity)):
        return (type(f).__name__,)
    if isinstance(f, Atom):
        return ("Atom", f.symbol, tuple(rename.get(v, v) for v in f.args))
    if isinstance(f, Equal):
        return ("Equal", rename.get(f.left, f.left), rename.get(f.right, f.right))
    if isinstance(f, (And, Or, Implies)):
        return (type(f).__name__, _alpha_canon(f.left, rename, depth),
                _alpha_canon(f.right, rename, depth))
    if isinstance(f, (Exists, Forall)):
        inner = dict(rename)
        inner[f.var] = f"${depth}"
        return (type(f).__name__, _alpha_canon(f.body, inner, depth + 1))
    raise InvalidInputError(f"not a formula: {f!r}")


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<turnstile>\|-)
  | (?P<arrow>->)
  | (?P<punct>[(),./:=&|])
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    out = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind not in ("ws", "comment"):
            out.append(_Token(kind, tok, line, col))
            col += len(tok)
        else:
            col += len(tok)
        pos = m.end()
    out.append(_Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature | None = None, extended: bool = False):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.extended = extended

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Token:
        t = self.peek()
        if t.text != text:
            self.fail(f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def expect_name(self, what: str) -> _Token:
        t = self.peek()
        if t.kind != "name":
            self.fail(f"expected {what}, found {t.text or 'end of input'!r}")
        if t.text in RESERVED:
            self.fail(f"{t.text!r} is a reserved word", t)
        return self.next()

    def var_name(self) -> str:
        t = self.expect_name("a variable")
        if t.text in RESERVED:
            self.fail(f"{t.text!r} is a reserved word", t)
        if not _VAR_RE.match(t.text):
            self.fail(f"variable {t.text!r} must start lowercase", t)
        return t.text

    # precedence: -> loosest (right associative), then |, then &
    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "arrow":
            tok = self.next()
            if not self.extended:
                raise ParseError("implication is only allowed in query formulas",
                                 tok.line, tok.col)
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek().text == "|":
            self.next()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.atom()
        while self.peek().text == "&":
            self.next()
            f = And(f, self.atom())
        return f

    def quantifier(self, keyword: str) -> Formula:
        self.next()
        names = [self.var_name()]
        while self.peek().text == ",":
            self.next()
            names.append(self.var_name())
        self.expect(".")
        body = self.formula()
        for v in reversed(names):
            body = Exists(v, body) if keyword == "exists" else Forall(v, body)
        return body

    def atom(self) -> Formula:
        t = self.peek()
        if t.text == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t.text == "true":
            self.next()
            return Truth()
        if t.text == "false":
            self.next()
            return Falsity()
        if t.text == "exists":
            return self.quantifier("exists")
        if t.text == "forall":
            tok = self.peek()
            if not self.extended:
                raise ParseError(
                    "universal quantification is only allowed in query formulas",
                    tok.line, tok.col)
            return self.quantifier("forall")
        if t.kind != "name":
            self.fail(f"expected a formula, found {t.text or 'end of input'!r}")
        if _REL_RE.match(t.text):
            return self.relation_atom()
        v = self.var_name()
        self.expect("=")
        return Equal(v, self.var_name())

    def relation_atom(self) -> Formula:
        t = self.next()
        args = []
        self.expect("(")
        if self.peek().text != ")":
            args.append(self.var_name())
            while self.peek().text == ",":
                self.next()
                args.append(self.var_name())
        self.expect(")")
        atom = Atom(t.text, tuple(args))
        if self.sig is not None:
            if atom.symbol not in self.sig.arities:
                self.fail(f"unknown relation {atom.symbol!r}", t)
            if len(args) != self.sig.arities[atom.symbol]:
                self.fail(f"{atom.symbol} expects {self.sig.arities[atom.symbol]} "
                          f"arguments, got {len(args)}", t)
        return atom


def parse_formula(text: str, sig: Signature, extended: bool = False) -> Formula:
    """One standalone formula; free variables are implicitly its context."""
    p = _Parser(text, sig, extended)
    f = p.formula()
    if p.peek().kind != "eof":
        p.fail(f"trailing input {p.peek().text!r}")
    check_formula(f, sig, set(free_vars(f)), extended)
    return f


def parse_sequent(text: str, sig: Signature, name: str = "goal") -> Sequent:
    """`lhs |- rhs` with the context inferred from both sides."""
    p = _Parser(text, sig, extended=False)
    lhs = p.formula()
    if p.peek().kind != "turnstile":
        p.fail("expected '|-'")
    p.next()
    rhs = p.formula()
    if p.peek().kind != "eof":
        p.fail(f"trailing input {p.peek().text!r}")
    context = free_vars(lhs) + tuple(v for v in free_vars(rhs)
                                     if v not in free_vars(lhs))
    check_formula(lhs, sig, set(context))
    check_formula(rhs, sig, set(context))
    return Sequent(name, context, lhs, rhs)


def parse_theory(text: str) -> Theory:
    """Theory file: `theory <name>`, `rel <Name>/<arity>` lines, axiom lines."""
    p = _Parser(text)
    p.expect("theory")
    tname = p.expect_name("a theory name").text
    relations: list[tuple[str, int]] = []
    axioms: list[Sequent] = []
    axiom_names: set[str] = set()
    while p.peek().kind != "eof":
        t = p.peek()
        if t.text == "rel":
            if axioms:
                p.fail("relation declarations must precede axioms")
            p.next()
            rname = p.expect_name("a relation name")
            if not _REL_RE.match(rname.text):
                p.fail(f"relation name {rname.text!r} must start uppercase", rname)
            p.expect("/")
            arity_tok = p.peek()
            if arity_tok.kind != "int":
                p.fail("expected an arity")
            p.next()
            if any(rname.text == existing for existing, _ in relations):
                p.fail(f"duplicate relation {rname.text!r}", rname)
            relations.append((rname.text, int(arity_tok.text)))
        elif t.text == "axiom":
            if p.sig is None:
                p.sig = Signature(relations)
            p.next()
            aname = p.expect_name("an axiom name")
            if aname.text in axiom_names:
                p.fail(f"duplicate axiom name {aname.text!r}", aname)
            axiom_names.add(aname.text)
            p.expect(":")
            lhs = p.formula()
            if p.peek().kind != "turnstile":
                p.fail("expected '|-'")
            p.next()
            rhs = p.formula()
            context = free_vars(lhs) + tuple(v for v in free_vars(rhs)
                                             if v not in free_vars(lhs))
            try:
                check_formula(lhs, p.sig, set(context))
                check_formula(rhs, p.sig, set(context))
            except InvalidInputError as exc:
                raise ParseError(str(exc), aname.line, aname.col) from None
            axioms.append(Sequent(aname.text, context, lhs, rhs))
        else:
            p.fail(f"expected 'rel' or 'axiom', found {t.text!r}")
    return Theory(tname, Signature(relations), tuple(axioms))


def load_theory(path: str) -> Theory:
    with open(path, encoding="utf-8") as fh:
        return parse_theory(fh.read())


# --- printing --------------------------------------------------------------

def format_formula(f: Formula) -> str:
    return _fmt(f, 0)


def _fmt(f: Formula, level: int) -> str:
    # levels: 0 formula (->), 1 disjunction, 2 conjunction, 3 atom
    if isinstance(f, Truth):
        return "true"
    if isinstance(f, Falsity):
        return "false"
    if isinstance(f, Atom):
        return f"{f.symbol}({', '.join(f.args)})"
    if isinstance(f, Equal):
        return f"{f.left} = {f.right}"
    if isinstance(f, Implies):
        s = f"{_fmt(f.left, 1)} -> {_fmt(f.right, 0)}"
        return f"({s})" if level > 0 else s
    if isinstance(f, Or):
        s = f"{_fmt(f.left, 1)} | {_fmt(f.right, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(f, And):
        s = f"{_fmt(f.left, 2)} & {_fmt(f.right, 3)}"
        return f"({s})" if level > 2 else s
    if isinstance(f, (Exists, Forall)):
        keyword = "exists" if isinstance(f, Exists) else "forall"
        names = [f.var]
        body = f.body
        while isinstance(body, type(f)):
            names.append(body.var)
            body = body.body
        s = f"{keyword} {', '.join(names)}. {_fmt(body, 0)}"
        return f"({s})" if level > 0 else s
    raise InvalidInputError(f"not a formula: {f!r}")


def format_theory(t: Theory) -> str:
    lines = [f"theory {t.name}"]
    for s in t.signature.symbols:
        lines.append(f"rel {s}/{t.signature.arities[s]}")
    for ax in t.axioms:
        lines.append(f"axiom {ax.name}: {format_formula(ax.lhs)} "
                     f"|- {format_formula(ax.rhs)}")
    return "\n".join(lines) + "\n"
