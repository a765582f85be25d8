"""Extracting the crisp quotient ``N`` from a fuzzy structure and checking it.

``U_N`` holds the sets of ``S`` whose tables only take the values 0 and 1.
Two of them are identified when their tables agree on ``V_n``; the classes,
together with the crisp elements of ``V_n`` (which have no ``∈_N`` members),
make up the domain of ``N``. ``x ∈_N [A]`` iff ``mu(x, rep A) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .model import materialize_comprehension
from .semantics import Crisp, FuzzySet, FuzzyStructure, ModelError, Named, UnknownConstant, render_value
from .stratify import is_stratified
from .syntax import (
    And,
    Const,
    CrispIn,
    DegEq,
    DegLt,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    MuEq,
    Not,
    Or,
    SetEq,
    Sort,
    TheoryEntry,
    Var,
    _all_names,
    fresh_name,
    free_variables,
    to_text,
    uses_mu,
)

CRISP_SCHEMA = "fuzzynf.crisp-model/1"
NF_SCHEMA = "fuzzynf.nf-report/1"
ONE = Fraction(1)


class CrispTranslationError(ValueError):
    pass


@dataclass(frozen=True)
class CrispCandidate:
    source: FuzzySet
    crisp: bool
    witness: tuple | None = None  # (element, degree) of the first non-binary entry

    @property
    def name(self) -> str:
        return self.source.name


def crisp_universe(st: FuzzyStructure) -> list[CrispCandidate]:
    """Every set of ``S`` with its binarity verdict over the whole domain."""
    out = []
    for fs in st.sets:
        witness = next(
            ((e, fs.table[e]) for e in st.domain if fs.table[e] not in (0, 1)),
            None,
        )
        out.append(CrispCandidate(fs, witness is None, witness))
    return out


@dataclass(frozen=True)
class EquivClass:
    ident: str
    representative: FuzzySet
    members: tuple[FuzzySet, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.members)

    def __str__(self) -> str:
        return self.ident


NElement = Union[Crisp, EquivClass]


@dataclass
class CrispStructure:
    """The quotient: crisp elements of ``V_n`` plus classes of crisp sets."""

    st: FuzzyStructure
    classes: tuple[EquivClass, ...]
    excluded: tuple[CrispCandidate, ...] = ()
    universal_class: EquivClass | None = None
    divergences: tuple[dict, ...] = ()
    _class_of: dict = field(default_factory=dict, repr=False)

    @property
    def crisp_domain(self) -> tuple[Crisp, ...]:
        return self.st.crisp_domain

    @property
    def domain(self) -> tuple[NElement, ...]:
        return self.crisp_domain + self.classes

    def class_of(self, name: str) -> EquivClass:
        try:
            return self._class_of[name]
        except KeyError:
            raise UnknownConstant(f"{name} is not a crisp set of the structure") from None

    def in_n(self, x: NElement, a: NElement) -> bool:
        """``x ∈_N a``; crisp elements of ``V_n`` have no members."""
        if not isinstance(a, EquivClass):
            return False
        elem = x if isinstance(x, Crisp) else Named(x.representative.name)
        return a.representative.table[elem] == ONE

    def adjacency(self) -> dict[str, list[str]]:
        return {c.ident: [_n_name(x) for x in self.domain if self.in_n(x, c)] for c in self.classes}

    def well_defined(self) -> list[dict]:
        """Pairs where swapping a representative changes ``∈_N``."""
        bad = []
        for x in self.classes:
            for a in self.classes:
                want = self.in_n(x, a)
                for xm in x.members:
                    for am in a.members:
                        if (am.table[Named(xm.name)] == ONE) != want:
                            bad.append({"element": xm.name, "set": am.name, "class_pair": [x.ident, a.ident]})
        return bad

    def to_json(self) -> dict:
        return {
            "schema": CRISP_SCHEMA,
            "level": self.st.level,
            "grid": self.st.grid.resolution,
            "classes": [
                {"id": c.ident, "representative": c.representative.name, "members": list(c.names)}
                for c in self.classes
            ],
            "excluded": [
                {"set": c.name, "element": str(c.witness[0]), "degree": render_value(c.witness[1])}
                for c in self.excluded
            ],
            "membership": self.adjacency(),
            "universal_class": self.universal_class.ident if self.universal_class else None,
            "divergences": list(self.divergences),
        }

    def to_text(self) -> str:
        lines = [f"crisp quotient: n={self.st.level} k={self.st.grid.resolution} classes={len(self.classes)}"]
        adj = self.adjacency()
        for c in self.classes:
            lines.append(f"  {c.ident} = [{c.representative.name}] members {{{', '.join(c.names)}}}")
            lines.append(f"    elements: {', '.join(adj[c.ident]) or '(none)'}")
        for c in self.excluded:
            lines.append(f"  excluded {c.name}: degree {render_value(c.witness[1])} at {c.witness[0]}")
        lines.append(f"  universal class: {self.universal_class.ident if self.universal_class else 'none'}")
        for d in self.divergences:
            lines.append(f"  divergence in {d['class']}: {d['sets'][0]} vs {d['sets'][1]} at {d['element']}")
        return "\n".join(lines)


def _n_name(x: NElement) -> str:
    return x.ident if isinstance(x, EquivClass) else str(x)


def quotient(cands: list[CrispCandidate], st: FuzzyStructure) -> CrispStructure:
    """Group the crisp candidates by their table on ``V_n``.

    Classes come in the order of their least member, which is also the
    representative.
    """
    crisp_dom = st.crisp_domain
    order = {name: i for i, name in enumerate(st.names)}
    cands = sorted(cands, key=lambda c: order[c.name])
    groups: dict[tuple, list[FuzzySet]] = {}
    for c in cands:
        if c.crisp:
            key = tuple(c.source.table[e] for e in crisp_dom)
            groups.setdefault(key, []).append(c.source)
    classes = []
    divergences = []
    for i, members in enumerate(groups.values()):
        cls = EquivClass(f"C{i}", members[0], tuple(members))
        classes.append(cls)
        for other in members[1:]:
            for e in st.named_domain:
                if other.table[e] != members[0].table[e]:
                    divergences.append(
                        {"class": cls.ident, "sets": [members[0].name, other.name], "element": e.name}
                    )
    ns = CrispStructure(
        st,
        tuple(classes),
        tuple(c for c in cands if not c.crisp),
        divergences=tuple(divergences),
    )
    ns._class_of = {m.name: c for c in classes for m in c.members}
    ns.universal_class = next((c for c in classes if not universality_failures(ns, c)), None)
    return ns


def extract(st: FuzzyStructure) -> CrispStructure:
    return quotient(crisp_universe(st), st)


def universality_failures(ns: CrispStructure, c: EquivClass) -> list[str]:
    """What stops ``c`` from being universal: non-member elements of ``N``."""
    return [_n_name(x) for x in ns.domain if not ns.in_n(x, c)]


def degree_var_for(psi: Formula) -> Var:
    return Var(fresh_name("d", _all_names(psi)), Sort.DEG)


def translate_crisp(psi: Formula, d: Var | None = None) -> Formula:
    """``d = 1 & psi'`` where every ``in(u, w)`` of ``psi`` becomes ``mu(u, w) = 1``."""
    if uses_mu(psi):
        raise CrispTranslationError("formula already contains mu atoms")
    d = d or degree_var_for(psi)

    def go(f: Formula) -> Formula:
        if isinstance(f, CrispIn):
            return MuEq(f.lhs, f.rhs, ONE, f.pos)
        if isinstance(f, Not):
            return Not(go(f.body))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(go(f.left), go(f.right))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, go(f.body))
        return f

    return And(DegEq(d, ONE), go(psi))


class NEvaluator:
    """Classical evaluation in ``N``: ``in`` is ``∈_N``, ``=`` is identity."""

    def __init__(self, ns: CrispStructure):
        self.ns = ns
        self._domain = ns.domain
        self._grid = ns.st.grid.values

    def _term(self, t, env):
        if isinstance(t, Var):
            return env[t]
        if isinstance(t, Const):
            el = self.ns.st.resolve(t)
            return el if isinstance(el, Crisp) else self.ns.class_of(el.name)
        return t

    def holds(self, f: Formula, env) -> bool:
        t = type(f)
        if t is CrispIn:
            return self.ns.in_n(self._term(f.lhs, env), self._term(f.rhs, env))
        if t is SetEq or t is DegEq:
            return self._term(f.a, env) == self._term(f.b, env)
        if t is DegLt:
            return self._term(f.a, env) < self._term(f.b, env)
        if t is Not:
            return not self.holds(f.body, env)
        if t is And:
            return self.holds(f.left, env) and self.holds(f.right, env)
        if t is Or:
            return self.holds(f.left, env) or self.holds(f.right, env)
        if t is Implies:
            return not self.holds(f.left, env) or self.holds(f.right, env)
        if t is Iff:
            return self.holds(f.left, env) == self.holds(f.right, env)
        if t is Forall or t is Exists:
            values = self._domain if f.var.sort is Sort.SET else self._grid
            want = t is Exists
            return want if any(self.holds(f.body, {**env, f.var: v}) == want for v in values) else not want
        raise CrispTranslationError(f"{type(f).__name__} has no meaning in N")


@dataclass(frozen=True)
class Clause:
    name: str
    holds: bool
    witness: dict | None = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"holds": self.holds, "witness": self.witness, **self.extra}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class NFReport:
    quotient: CrispStructure
    clauses: list[Clause]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.clauses)

    def to_json(self) -> dict:
        return {
            "schema": NF_SCHEMA,
            "quotient": self.quotient.to_json(),
            "clauses": {c.name: c.to_json() for c in self.clauses},
            "result": "PASS" if self.holds else "FAIL",
        }

    def to_text(self) -> str:
        lines = [self.quotient.to_text(), "nf verification:"]
        for c in self.clauses:
            line = f"  {c.name:<28} {'PASS' if c.holds else 'FAIL'}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
            if not c.holds and c.witness:
                lines.append("    witness: " + ", ".join(f"{k}={v}" for k, v in c.witness.items()))
        return "\n".join(lines)


def _binarity_clause(ns: CrispStructure) -> Clause:
    for c in ns.classes:
        for m in c.members:
            for e in ns.st.domain:
                if m.table[e] not in (0, 1):
                    return Clause("binarity", False, {"set": m.name, "element": str(e), "degree": render_value(m.table[e])})
    return Clause("binarity", True, detail=f"{sum(len(c.members) for c in ns.classes)} set(s) are 0/1-valued")


def _extensionality_clause(ns: CrispStructure) -> Clause:
    crisp_dom = ns.crisp_domain
    for i, a in enumerate(ns.classes):
        for b in ns.classes[i + 1 :]:
            if all(a.representative.table[e] == b.representative.table[e] for e in crisp_dom):
                return Clause("extensionality", False, {"classes": [a.ident, b.ident]}, "classes agree on V_n")
    return Clause("extensionality", True, detail=f"{len(ns.classes)} class(es) pairwise separated on V_n")


def _well_defined_clause(ns: CrispStructure) -> Clause:
    bad = ns.well_defined()
    if bad:
        return Clause("membership_well_defined", False, bad[0], f"{len(bad)} representative-dependent pair(s)")
    return Clause("membership_well_defined", True)


def representation_clause(ns: CrispStructure, entry: TheoryEntry) -> Clause:
    """Translate, materialize over the structure, and compare with ``N``-truth."""
    name = f"represents:{entry.label}"
    psi, x = entry.formula, entry.x
    extra = free_variables(psi) - {x}
    if extra:
        return Clause(name, False, None, f"unexpected free variable(s) {sorted(v.name for v in extra)}")
    strat = is_stratified(psi)
    if not strat:
        return Clause(name, False, {"certificate": strat.certificate.describe()}, "not stratified")
    d = degree_var_for(psi)
    try:
        translated = translate_crisp(psi, d)
        st = ns.st
        table = materialize_comprehension(translated, x, d, st, name=f"[{entry.label}]").table
        nev = NEvaluator(ns)
        for e in st.domain:
            if table[e] not in (0, 1):
                return Clause(name, False, {"element": str(e), "degree": render_value(table[e])}, "not 0/1-valued")
        for e in st.crisp_domain:
            if (table[e] == ONE) != nev.holds(psi, {x: e}):
                return Clause(name, False, {"element": str(e), "table": render_value(table[e])}, "fiber differs")
        for c in ns.classes:
            truth = nev.holds(psi, {x: c})
            for m in c.members:
                if (table[Named(m.name)] == ONE) != truth:
                    return Clause(
                        name,
                        False,
                        {"element": c.ident, "member": m.name, "table": render_value(table[Named(m.name)])},
                        "fiber differs",
                    )
    except (ModelError, CrispTranslationError) as exc:
        return Clause(name, False, {"error": type(exc).__name__}, str(exc))
    key = tuple(table[e] for e in st.crisp_domain)
    same = next(
        (c.ident for c in ns.classes if tuple(c.representative.table[e] for e in st.crisp_domain) == key),
        "new",
    )
    members = [str(e) for e in st.crisp_domain if table[e] == ONE] + [
        c.ident for c in ns.classes if table[Named(c.representative.name)] == ONE
    ]
    return Clause(
        name,
        True,
        detail=f"{to_text(translated)}; class {same}",
        extra={"class": same, "members": members},
    )


def _universality_clause(ns: CrispStructure) -> Clause:
    u = ns.universal_class
    if u is None:
        best = min(ns.classes, key=lambda c: len(universality_failures(ns, c)), default=None)
        witness = None
        if best is not None:
            witness = {"class": best.ident, "missing": universality_failures(ns, best)[0]}
        return Clause("universality", False, witness, "no class contains every element of N")
    return Clause(
        "universality",
        True,
        detail=f"{u.ident} = [{u.representative.name}] contains all {len(ns.domain)} element(s) of N, itself included",
        extra={"class": u.ident},
    )


def verify_nf(ns: CrispStructure, corpus: list[TheoryEntry]) -> NFReport:
    clauses = [_binarity_clause(ns), _extensionality_clause(ns), _well_defined_clause(ns)]
    clauses += [representation_clause(ns, e) for e in corpus]
    clauses.append(_universality_clause(ns))
    return NFReport(ns, clauses)
