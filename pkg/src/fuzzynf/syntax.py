"""Two-sorted formula syntax for fuzzy set theory.

Formulas range over a set sort ``U`` and a degree sort ``D`` whose values are
exact rationals in ``[0, 1]``. Atoms are crisp membership ``in(a, b)``, graded
membership ``mu(a, b) = d``, degree comparisons ``d < e`` / ``d = e`` and set
equality ``a = b``.

Concrete grammar::

    formula := quant | iff
    quant   := ("forall" | "exists") ident ":" ("U" | "D") "." formula
    iff     := impl ("<->" impl)*
    impl    := disj ("->" disj)*          (right associative)
    disj    := conj ("|" conj)*
    conj    := neg ("&" neg)*
    neg     := "~" neg | quant | atom
    atom    := "in" "(" sterm "," sterm ")"
             | "mu" "(" sterm "," sterm ")" ("=" | "<") dterm
             | dterm ("=" | "<") dterm | sterm "=" sterm | "(" formula ")"

Theory files hold one entry per line::

    axiom <label>: <formula>
    comprehension <label> (x, v): <formula>
    classical <label> (x): <formula>

``#`` starts a comment.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "Degree",
    "Sort",
    "Var",
    "Const",
    "CrispIn",
    "MuEq",
    "DegLt",
    "DegEq",
    "SetEq",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "Forall",
    "Exists",
    "Formula",
    "TheoryEntry",
    "TheoryFragment",
    "SyntaxError_",
    "SortClash",
    "UnboundVariable",
    "TheoryError",
    "UNIVERSAL",
    "degree",
    "format_degree",
    "parse_formula",
    "sort_check",
    "free_variables",
    "constants_of",
    "atoms",
    "to_text",
    "rename_free",
    "fresh_name",
    "uses_crisp_in",
    "uses_mu",
    "language_of",
    "parse_theory_file",
    "theory_to_text",
]

Degree = Fraction
"""Membership degrees are exact, fully reduced rationals in ``[0, 1]``."""

UNIVERSAL = "V"
_CONSTANT_ALIASES = {"V_X": UNIVERSAL}
_HF_CONSTANT = re.compile(r"hf(0|[1-9][0-9]*)$")
_KEYWORDS = frozenset({"forall", "exists", "in", "mu"})


class Sort(enum.Enum):
    SET = "U"
    DEG = "D"

    def __str__(self) -> str:
        return self.value


def degree(value: int | str | Fraction) -> Fraction:
    """Build a degree, rejecting anything outside ``[0, 1]``."""
    d = Fraction(value)
    if not 0 <= d <= 1:
        raise ValueError(f"degree {d} is outside [0, 1]")
    return d


def format_degree(d: Fraction) -> str:
    if d.denominator == 1:
        return str(d.numerator)
    return f"{d.numerator}/{d.denominator}"


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """A named set: a member of the model's fuzzy-set list or ``hf<code>``."""

    name: str

    @property
    def sort(self) -> Sort:
        return Sort.SET

    def __str__(self) -> str:
        return self.name


SetTerm = Union[Var, Const]
DegreeTerm = Union[Var, Fraction]
Term = Union[Var, Const, Fraction]


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CrispIn:
    lhs: SetTerm
    rhs: SetTerm
    pos: int | None = _pos()


@dataclass(frozen=True)
class MuEq:
    elem: SetTerm
    set: SetTerm
    deg: DegreeTerm
    pos: int | None = _pos()


@dataclass(frozen=True)
class DegLt:
    a: DegreeTerm
    b: DegreeTerm
    pos: int | None = _pos()


@dataclass(frozen=True)
class DegEq:
    a: DegreeTerm
    b: DegreeTerm
    pos: int | None = _pos()


@dataclass(frozen=True)
class SetEq:
    a: SetTerm
    b: SetTerm
    pos: int | None = _pos()


@dataclass(frozen=True)
class Not:
    body: Formula


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall:
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists:
    var: Var
    body: Formula


Atom = Union[CrispIn, MuEq, DegLt, DegEq, SetEq]
Binary = Union[And, Or, Implies, Iff]
Quantifier = Union[Forall, Exists]
Formula = Union[CrispIn, MuEq, DegLt, DegEq, SetEq, Not, And, Or, Implies, Iff, Forall, Exists]

ATOM_TYPES = (CrispIn, MuEq, DegLt, DegEq, SetEq)
BINARY_TYPES = (And, Or, Implies, Iff)
QUANT_TYPES = (Forall, Exists)


# --------------------------------------------------------------------------
# Errors


class SyntaxError_(ValueError):
    """Lexical or grammatical error, carrying a ``line:col`` position."""

    def __init__(self, message: str, text: str = "", offset: int | None = None):
        self.offset = offset
        self.line, self.col = _line_col(text, offset)
        where = f"{self.line}:{self.col}: " if offset is not None else ""
        super().__init__(where + message)


class SortClash(SyntaxError_):
    def __init__(self, expected: Sort, found: Sort, what: str, text: str = "", offset: int | None = None):
        self.expected = expected
        self.found = found
        super().__init__(f"sort clash on {what}: expected {expected}, found {found}", text, offset)


class UnboundVariable(SyntaxError_):
    pass


class TheoryError(ValueError):
    pass


def _line_col(text: str, offset: int | None) -> tuple[int, int]:
    if offset is None:
        return 0, 0
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


# --------------------------------------------------------------------------
# Lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<nat>[0-9]+)
  | (?P<op><->|->|[()&|~,:.=</])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | nat | op | eof
    value: str
    offset: int


def _lex(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise SyntaxError_(f"unexpected character {text[i]!r}", text, i)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), i))
        i = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


# --------------------------------------------------------------------------
# Parser
#
# Parsing is two-phase: a raw tree with unresolved identifiers, then a scoped
# resolution pass that infers sorts of free identifiers, turns known names into
# constants and renames binders to be unique across the whole formula.


@dataclass
class _RawName:
    name: str
    offset: int


@dataclass
class _RawAtom:
    kind: str  # in | mu= | mu< | eq | lt
    args: list
    offset: int


@dataclass
class _RawQuant:
    kind: str
    name: str
    sort: Sort
    body: object
    offset: int


@dataclass
class _RawOp:
    kind: str  # not | and | or | implies | iff
    args: list


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Tok | None = None) -> SyntaxError_:
        tok = tok or self.peek()
        return SyntaxError_(message, self.text, tok.offset)

    def expect(self, value: str) -> _Tok:
        tok = self.next()
        if tok.value != value or tok.kind not in ("op", "ident"):
            shown = tok.value or "end of input"
            raise self.error(f"expected {value!r}, found {shown!r}", tok)
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "ident") and tok.value == value

    def parse(self):
        node = self.formula()
        if self.peek().kind != "eof":
            raise self.error(f"unexpected {self.peek().value!r}")
        return node

    def formula(self):
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.iff()

    def quant(self):
        kw = self.next()
        name = self.next()
        if name.kind != "ident" or name.value in _KEYWORDS:
            raise self.error("expected a variable name", name)
        self.expect(":")
        s = self.next()
        if s.value not in ("U", "D"):
            raise self.error("expected sort U or D", s)
        self.expect(".")
        body = self.formula()
        return _RawQuant(kw.value, name.value, Sort(s.value), body, kw.offset)

    def _chain(self, sub, op: str, kind: str):
        node = sub()
        while self.at(op):
            self.next()
            node = _RawOp(kind, [node, sub()])
        return node

    def iff(self):
        return self._chain(self.impl, "<->", "iff")

    def impl(self):
        left = self.disj()
        if self.at("->"):
            self.next()
            return _RawOp("implies", [left, self.impl()])
        return left

    def disj(self):
        return self._chain(self.conj, "|", "or")

    def conj(self):
        return self._chain(self.neg, "&", "and")

    def neg(self):
        if self.at("~"):
            self.next()
            return _RawOp("not", [self.neg()])
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.atom()

    def atom(self):
        tok = self.peek()
        if self.at("("):
            self.next()
            node = self.formula()
            self.expect(")")
            return node
        if self.at("in"):
            self.next()
            self.expect("(")
            a = self.sterm()
            self.expect(",")
            b = self.sterm()
            self.expect(")")
            return _RawAtom("in", [a, b], tok.offset)
        if self.at("mu"):
            self.next()
            self.expect("(")
            a = self.sterm()
            self.expect(",")
            b = self.sterm()
            self.expect(")")
            op = self.next()
            if op.value not in ("=", "<"):
                raise self.error("expected '=' or '<' after mu(...)", op)
            d = self.dterm()
            return _RawAtom("mu" + op.value, [a, b, d], tok.offset)
        left = self.dterm()
        op = self.next()
        if op.value not in ("=", "<") or op.kind != "op":
            raise self.error("expected '=' or '<'", op)
        right = self.dterm()
        return _RawAtom("eq" if op.value == "=" else "lt", [left, right], tok.offset)

    def sterm(self) -> _RawName:
        tok = self.next()
        if tok.kind != "ident" or tok.value in _KEYWORDS:
            raise self.error("expected a set term", tok)
        return _RawName(tok.value, tok.offset)

    def dterm(self):
        tok = self.next()
        if tok.kind == "ident" and tok.value not in _KEYWORDS:
            return _RawName(tok.value, tok.offset)
        if tok.kind == "nat":
            num = int(tok.value)
            den = 1
            if self.at("/"):
                self.next()
                d = self.next()
                if d.kind != "nat":
                    raise self.error("expected a denominator", d)
                den = int(d.value)
                if den == 0:
                    raise self.error("zero denominator", d)
            value = Fraction(num, den)
            if value > 1:
                raise self.error(f"degree {format_degree(value)} exceeds 1", tok)
            return value
        raise self.error("expected a term", tok)


def _raw_names(node, acc: set[str]) -> set[str]:
    if isinstance(node, _RawName):
        acc.add(node.name)
    elif isinstance(node, _RawAtom):
        for a in node.args:
            _raw_names(a, acc)
    elif isinstance(node, _RawQuant):
        acc.add(node.name)
        _raw_names(node.body, acc)
    elif isinstance(node, _RawOp):
        for a in node.args:
            _raw_names(a, acc)
    return acc


def _is_constant_name(name: str, constants: frozenset[str]) -> bool:
    return (
        name in constants
        or name == UNIVERSAL
        or name in _CONSTANT_ALIASES
        or bool(_HF_CONSTANT.match(name))
    )


class _Resolver:
    """Infers sorts of free names, then builds the typed AST."""

    def __init__(self, text: str, free: Mapping[str, Sort] | None, constants: frozenset[str], strict: bool):
        self.text = text
        self.strict = strict
        self.free_sorts: dict[str, Sort] = dict(free or {})
        self.constants = constants
        self.taken: set[str] = set()
        self.used_binders: set[str] = set()

    # phase 1: sort inference for free names
    def infer(self, node) -> None:
        changed = True
        while changed:
            changed = self._infer(node, {})

    def _sort_of(self, name: _RawName, scope: dict[str, Sort]) -> Sort | None:
        if name.name in scope:
            return scope[name.name]
        if _is_constant_name(name.name, self.constants):
            return Sort.SET
        return self.free_sorts.get(name.name)

    def _require(self, term, sort: Sort, scope: dict[str, Sort], what: str) -> bool:
        if isinstance(term, Fraction):
            if sort is not Sort.DEG:
                raise SortClash(sort, Sort.DEG, what, self.text, None)
            return False
        found = self._sort_of(term, scope)
        if found is None:
            if self.strict:
                raise UnboundVariable(f"unbound variable {term.name!r}", self.text, term.offset)
            self.free_sorts[term.name] = sort
            return True
        if found is not sort:
            raise SortClash(sort, found, repr(term.name), self.text, term.offset)
        return False

    def _infer(self, node, scope: dict[str, Sort]) -> bool:
        if isinstance(node, _RawQuant):
            return self._infer(node.body, {**scope, node.name: node.sort})
        if isinstance(node, _RawOp):
            return any([self._infer(a, scope) for a in node.args])
        kind, args = node.kind, node.args
        if kind == "in":
            return self._require(args[0], Sort.SET, scope, "in") | self._require(args[1], Sort.SET, scope, "in")
        if kind in ("mu=", "mu<"):
            return (
                self._require(args[0], Sort.SET, scope, "mu")
                | self._require(args[1], Sort.SET, scope, "mu")
                | self._require(args[2], Sort.DEG, scope, "mu")
            )
        if kind == "lt":
            return self._require(args[0], Sort.DEG, scope, "<") | self._require(args[1], Sort.DEG, scope, "<")
        # "=": decided by whichever side has a known sort
        sorts = [Sort.DEG if isinstance(a, Fraction) else self._sort_of(a, scope) for a in args]
        known = [s for s in sorts if s is not None]
        if not known:
            return False
        target = known[0]
        return self._require(args[0], target, scope, "=") | self._require(args[1], target, scope, "=")

    def default_unresolved(self, node) -> None:
        """Names still unsorted after inference occur only in ``a = b``; they are sets."""
        pending = self._unsorted(node, set(), [])
        if pending and self.strict:
            raise UnboundVariable(f"unbound variable {pending[0].name!r}", self.text, pending[0].offset)
        for raw in pending:
            self.free_sorts.setdefault(raw.name, Sort.SET)
        self.infer(node)

    def _unsorted(self, node, scope: set[str], acc: list) -> list:
        if isinstance(node, _RawName):
            if not (
                node.name in scope
                or node.name in self.free_sorts
                or _is_constant_name(node.name, self.constants)
            ):
                acc.append(node)
        elif isinstance(node, _RawQuant):
            self._unsorted(node.body, scope | {node.name}, acc)
        elif isinstance(node, (_RawOp, _RawAtom)):
            for a in node.args:
                self._unsorted(a, scope, acc)
        return acc

    # phase 2: typed AST with unique binders
    def build(self, node, scope: dict[str, Var]):
        if isinstance(node, _RawQuant):
            new_name = node.name
            if new_name in self.used_binders or new_name in self.free_sorts or _is_constant_name(
                new_name, self.constants
            ):
                new_name = fresh_name(node.name, self.taken)
            self.used_binders.add(new_name)
            self.taken.add(new_name)
            var = Var(new_name, node.sort)
            body = self.build(node.body, {**scope, node.name: var})
            return (Forall if node.kind == "forall" else Exists)(var, body)
        if isinstance(node, _RawOp):
            args = [self.build(a, scope) for a in node.args]
            if node.kind == "not":
                return Not(args[0])
            cls = {"and": And, "or": Or, "implies": Implies, "iff": Iff}[node.kind]
            return cls(*args)
        args = [self.term(a, scope) for a in node.args]
        kind = node.kind
        if kind == "in":
            return CrispIn(args[0], args[1], node.offset)
        if kind == "mu=":
            return MuEq(args[0], args[1], args[2], node.offset)
        if kind == "mu<":
            # mu(a, b) < t  ==  exists w:D. mu(a, b) = w & w < t
            w = Var(fresh_name("w", self.taken), Sort.DEG)
            self.taken.add(w.name)
            self.used_binders.add(w.name)
            return Exists(w, And(MuEq(args[0], args[1], w, node.offset), DegLt(w, args[2], node.offset)))
        if kind == "lt":
            return DegLt(args[0], args[1], node.offset)
        if _term_sort(args[0]) is Sort.DEG:
            return DegEq(args[0], args[1], node.offset)
        return SetEq(args[0], args[1], node.offset)

    def term(self, raw, scope: dict[str, Var]) -> Term:
        if isinstance(raw, Fraction):
            return raw
        if raw.name in scope:
            return scope[raw.name]
        if raw.name in self.free_sorts:
            return Var(raw.name, self.free_sorts[raw.name])
        return Const(_CONSTANT_ALIASES.get(raw.name, raw.name))


def _term_sort(t: Term) -> Sort:
    if isinstance(t, Fraction):
        return Sort.DEG
    return t.sort


def parse_formula(
    text: str,
    free: Mapping[str, Sort] | None = None,
    constants: Iterable[str] = (),
    strict: bool = False,
) -> Formula:
    """Parse ``text`` into a sort-annotated formula.

    Names that are neither bound nor constants are free variables. ``free``
    declares the sorts of some of them; the rest are inferred from the
    positions they occur in, unless ``strict`` is set, in which case any
    undeclared free name is an error.
    ``V``, ``V_X`` and ``hf<code>`` are always constants; ``constants`` adds
    more (typically the labels of comprehension-defined sets).
    """
    raw = _Parser(text).parse()
    resolver = _Resolver(text, free, frozenset(constants), strict)
    resolver.taken = _raw_names(raw, set()) | set(resolver.free_sorts)
    resolver.infer(raw)
    resolver.default_unresolved(raw)
    return resolver.build(raw, {})


# --------------------------------------------------------------------------
# Traversals


def atoms(f: Formula) -> Iterator[Atom]:
    """Atoms of ``f`` in left-to-right order."""
    if isinstance(f, ATOM_TYPES):
        yield f
    elif isinstance(f, Not):
        yield from atoms(f.body)
    elif isinstance(f, BINARY_TYPES):
        yield from atoms(f.left)
        yield from atoms(f.right)
    else:
        yield from atoms(f.body)


def _atom_terms(a: Atom) -> tuple[Term, ...]:
    if isinstance(a, MuEq):
        return (a.elem, a.set, a.deg)
    if isinstance(a, CrispIn):
        return (a.lhs, a.rhs)
    return (a.a, a.b)


def free_variables(f: Formula) -> frozenset[Var]:
    if isinstance(f, ATOM_TYPES):
        return frozenset(t for t in _atom_terms(f) if isinstance(t, Var))
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, BINARY_TYPES):
        return free_variables(f.left) | free_variables(f.right)
    return free_variables(f.body) - {f.var}


def constants_of(f: Formula) -> frozenset[str]:
    return frozenset(t.name for a in atoms(f) for t in _atom_terms(a) if isinstance(t, Const))


def _all_names(f: Formula) -> set[str]:
    names = {t.name for a in atoms(f) for t in _atom_terms(a) if isinstance(t, (Var, Const))}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, QUANT_TYPES):
            names.add(g.var.name)
            stack.append(g.body)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, BINARY_TYPES):
            stack.extend((g.left, g.right))
    return names


def fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken and base not in _KEYWORDS:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def rename_free(f: Formula, old: Var, new: Term) -> Formula:
    """Replace free occurrences of ``old`` by ``new``.

    ``new`` must not be captured: callers pass a name that does not occur in
    ``f`` (see :func:`fresh_name`), a constant or a degree literal.
    """

    def term(t: Term) -> Term:
        return new if t == old else t

    def go(g: Formula) -> Formula:
        if isinstance(g, CrispIn):
            return CrispIn(term(g.lhs), term(g.rhs), g.pos)
        if isinstance(g, MuEq):
            return MuEq(term(g.elem), term(g.set), term(g.deg), g.pos)
        if isinstance(g, DegLt):
            return DegLt(term(g.a), term(g.b), g.pos)
        if isinstance(g, DegEq):
            return DegEq(term(g.a), term(g.b), g.pos)
        if isinstance(g, SetEq):
            return SetEq(term(g.a), term(g.b), g.pos)
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, BINARY_TYPES):
            return type(g)(go(g.left), go(g.right))
        if g.var == old:
            return g
        return type(g)(g.var, go(g.body))

    return go(f)


def uses_crisp_in(f: Formula) -> bool:
    return any(isinstance(a, CrispIn) for a in atoms(f))


def uses_mu(f: Formula) -> bool:
    return any(isinstance(a, MuEq) for a in atoms(f))


def language_of(f: Formula) -> str:
    """``"L2"`` when ``f`` avoids crisp membership, else ``"L1"``."""
    return "L1" if uses_crisp_in(f) else "L2"


# --------------------------------------------------------------------------
# Sort checking


def sort_check(f: Formula) -> Formula:
    """Verify every term position carries the expected sort; returns ``f``.

    Also rejects a free name used at two different sorts.
    """
    seen: dict[str, Sort] = {}

    def want(t: Term, sort: Sort, what: str, pos) -> None:
        found = _term_sort(t)
        if isinstance(t, Fraction) and not 0 <= t <= 1:
            raise SyntaxError_(f"degree {t} is outside [0, 1]")
        if found is not sort:
            raise SortClash(sort, found, f"{what} argument {t}", "", pos)

    def go(g: Formula, bound: frozenset[Var]) -> None:
        if isinstance(g, CrispIn):
            want(g.lhs, Sort.SET, "in", g.pos)
            want(g.rhs, Sort.SET, "in", g.pos)
        elif isinstance(g, MuEq):
            want(g.elem, Sort.SET, "mu", g.pos)
            want(g.set, Sort.SET, "mu", g.pos)
            want(g.deg, Sort.DEG, "mu", g.pos)
        elif isinstance(g, (DegLt, DegEq)):
            want(g.a, Sort.DEG, "degree comparison", g.pos)
            want(g.b, Sort.DEG, "degree comparison", g.pos)
        elif isinstance(g, SetEq):
            want(g.a, Sort.SET, "set equality", g.pos)
            want(g.b, Sort.SET, "set equality", g.pos)
        elif isinstance(g, Not):
            go(g.body, bound)
            return
        elif isinstance(g, BINARY_TYPES):
            go(g.left, bound)
            go(g.right, bound)
            return
        else:
            go(g.body, bound | {g.var})
            return
        for t in _atom_terms(g):
            if isinstance(t, Var) and t not in bound:
                prev = seen.setdefault(t.name, t.sort)
                if prev is not t.sort:
                    raise SortClash(prev, t.sort, f"free variable {t.name}", "", g.pos)

    go(f, frozenset())
    return f


# --------------------------------------------------------------------------
# Printing

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_OPS = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def _term_text(t: Term) -> str:
    if isinstance(t, Fraction):
        return format_degree(t)
    return t.name


def to_text(f: Formula) -> str:
    """Render ``f`` in the concrete syntax; ``parse_formula`` reads it back."""
    if isinstance(f, CrispIn):
        return f"in({_term_text(f.lhs)}, {_term_text(f.rhs)})"
    if isinstance(f, MuEq):
        return f"mu({_term_text(f.elem)}, {_term_text(f.set)}) = {_term_text(f.deg)}"
    if isinstance(f, DegLt):
        return f"{_term_text(f.a)} < {_term_text(f.b)}"
    if isinstance(f, (DegEq, SetEq)):
        return f"{_term_text(f.a)} = {_term_text(f.b)}"
    if isinstance(f, QUANT_TYPES):
        kw = "forall" if isinstance(f, Forall) else "exists"
        return f"{kw} {f.var.name}:{f.var.sort}. {to_text(f.body)}"
    if isinstance(f, Not):
        return "~" + _wrap(f.body, 5)
    prec = _PREC[type(f)]
    right_assoc = isinstance(f, Implies)
    left = _wrap(f.left, prec + (1 if right_assoc else 0))
    right = _wrap(f.right, prec + (0 if right_assoc else 1))
    return f"{left} {_OPS[type(f)]} {right}"


def _wrap(f: Formula, min_prec: int) -> str:
    if isinstance(f, QUANT_TYPES):
        return f"({to_text(f)})"
    if isinstance(f, BINARY_TYPES) and _PREC[type(f)] < min_prec:
        return f"({to_text(f)})"
    return to_text(f)


# --------------------------------------------------------------------------
# Theory files


@dataclass(frozen=True)
class TheoryEntry:
    """One labeled formula.

    ``kind`` is ``axiom`` (closed formula), ``comprehension`` (designated set
    variable ``x`` and degree variable ``v``) or ``classical`` (designated set
    variable ``x`` only).
    """

    kind: str
    label: str
    formula: Formula
    x: Var | None = None
    v: Var | None = None


@dataclass(frozen=True)
class TheoryFragment:
    name: str
    entries: tuple[TheoryEntry, ...] = ()

    @property
    def comprehensions(self) -> tuple[TheoryEntry, ...]:
        return tuple(e for e in self.entries if e.kind == "comprehension")

    @property
    def axioms(self) -> tuple[TheoryEntry, ...]:
        return tuple(e for e in self.entries if e.kind == "axiom")

    @property
    def classicals(self) -> tuple[TheoryEntry, ...]:
        return tuple(e for e in self.entries if e.kind == "classical")

    @property
    def k(self) -> int:
        return len(self.comprehensions)

    def with_entries(self, entries: Iterable[TheoryEntry], name: str | None = None) -> TheoryFragment:
        return TheoryFragment(name or self.name, tuple(entries))


_ENTRY = re.compile(
    r"""^(?P<kind>axiom|comprehension|classical)\s+
        (?P<label>[A-Za-z_][A-Za-z0-9_]*)\s*
        (?:\(\s*(?P<vars>[^)]*)\)\s*)?
        :(?P<body>.*)$""",
    re.VERBOSE,
)


def parse_theory_file(text: str, name: str = "theory") -> TheoryFragment:
    """Parse a line-oriented theory file.

    Comprehension labels are set constants visible to every formula in the
    file; whether a reference is legal (earlier sets only) is decided when the
    model is built.
    """
    lines = []
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ENTRY.match(line)
        if m is None:
            raise TheoryError(f"line {lineno}: expected 'axiom', 'comprehension' or 'classical' entry")
        lines.append((lineno, m))

    labels = [m["label"] for _, m in lines]
    dupes = sorted({lbl for lbl in labels if labels.count(lbl) > 1})
    if dupes:
        raise TheoryError(f"duplicate label(s): {', '.join(dupes)}")
    set_names = {m["label"] for _, m in lines if m["kind"] == "comprehension"}
    reserved = set_names & ({UNIVERSAL} | set(_CONSTANT_ALIASES))
    if reserved:
        raise TheoryError(f"label {sorted(reserved)[0]!r} is reserved for the universal set")

    entries = []
    for lineno, m in lines:
        kind, label, body = m["kind"], m["label"], m["body"]
        names = [s.strip() for s in (m["vars"] or "").split(",") if s.strip()]
        expected = {"axiom": 0, "comprehension": 2, "classical": 1}[kind]
        if len(names) != expected:
            raise TheoryError(
                f"line {lineno}: {kind} {label!r} needs {expected} designated variable(s), got {len(names)}"
            )
        free: dict[str, Sort] = {}
        if names:
            free[names[0]] = Sort.SET
        if len(names) == 2:
            if names[1] == names[0]:
                raise TheoryError(f"line {lineno}: designated variables must differ")
            free[names[1]] = Sort.DEG
        try:
            formula = parse_formula(body, free=free, constants=set_names, strict=True)
        except SyntaxError_ as exc:
            raise TheoryError(f"line {lineno} ({label}): {exc}") from exc
        x = Var(names[0], Sort.SET) if names else None
        v = Var(names[1], Sort.DEG) if len(names) == 2 else None
        entries.append(TheoryEntry(kind, label, formula, x, v))
    return TheoryFragment(name, tuple(entries))


def theory_to_text(frag: TheoryFragment) -> str:
    out = []
    for e in frag.entries:
        if e.kind == "axiom":
            head = f"axiom {e.label}"
        elif e.kind == "comprehension":
            head = f"comprehension {e.label} ({e.x.name}, {e.v.name})"
        else:
            head = f"classical {e.label} ({e.x.name})"
        out.append(f"{head}: {to_text(e.formula)}")
    return "\n".join(out) + ("\n" if out else "")
