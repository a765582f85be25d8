"""Finite fuzzy structures and formula evaluation over them.

A structure has a crisp part ``V_n`` and a list ``S`` of named fuzzy sets whose
first entry is the universal set ``V``. Set quantifiers range over
``V_n ∪ S``; degree quantifiers range over the grid.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

from .hierarchy import DegreeGrid, HFSet, HFUniverse, crisp_in
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
    Var,
    format_degree,
)

_HF_CONST = re.compile(r"hf(0|[1-9][0-9]*)$")


class ModelError(ValueError):
    pass


class NotAFuzzySet(ModelError):
    """``mu(x, y)`` with ``y`` a crisp element; the value is undefined."""


class MuOnCrisp(NotAFuzzySet):
    """Raised by strict evaluation when a ``mu`` atom's set argument is crisp."""


class UnknownConstant(ModelError):
    pass


class SelfReference(ModelError):
    pass


@dataclass(frozen=True, order=True)
class Crisp:
    hf: HFSet

    def __str__(self) -> str:
        return self.hf.render()


@dataclass(frozen=True, order=True)
class Named:
    name: str

    def __str__(self) -> str:
        return self.name


DomainElement = Union[Crisp, Named]
Value = Union[Crisp, Named, Fraction]
Env = Mapping[Var, Value]


def render_value(v: Value) -> str:
    if isinstance(v, Fraction):
        return format_degree(v)
    return str(v)


@dataclass(frozen=True)
class FuzzySet:
    name: str
    table: Mapping[DomainElement, Fraction]

    def __getitem__(self, e: DomainElement) -> Fraction:
        return self.table[e]

    def values(self) -> set[Fraction]:
        return set(self.table.values())


@dataclass(frozen=True, eq=False)
class FuzzyStructure:
    """``V_n``, the degree grid and the named sets.

    ``names`` fixes the whole list ``S`` up front (and so the domain);
    ``tables`` holds the sets materialized so far, in ``names`` order.
    """

    universe: HFUniverse
    grid: DegreeGrid
    names: tuple[str, ...]
    tables: Mapping[str, FuzzySet] = field(default_factory=dict)

    @property
    def level(self) -> int:
        return self.universe.level

    @property
    def crisp_domain(self) -> tuple[Crisp, ...]:
        return tuple(Crisp(h) for h in self.universe.elements)

    @property
    def named_domain(self) -> tuple[Named, ...]:
        return tuple(Named(n) for n in self.names)

    @property
    def domain(self) -> tuple[DomainElement, ...]:
        """``V_n ∪ S`` in canonical order: crisp by code, then ``S`` order."""
        return self.crisp_domain + self.named_domain

    @property
    def sets(self) -> tuple[FuzzySet, ...]:
        return tuple(self.tables[n] for n in self.names if n in self.tables)

    @property
    def complete(self) -> bool:
        return all(n in self.tables for n in self.names)

    def fuzzy_set(self, name: str) -> FuzzySet:
        return self.tables[name]

    def with_set(self, fs: FuzzySet) -> FuzzyStructure:
        if fs.name not in self.names:
            raise UnknownConstant(f"{fs.name!r} is not a member of S")
        return FuzzyStructure(self.universe, self.grid, self.names, {**self.tables, fs.name: fs})

    def with_entry(self, name: str, elem: DomainElement, d: Fraction) -> FuzzyStructure:
        """Copy with one table entry overwritten."""
        old = self.tables[name]
        return self.with_set(FuzzySet(name, {**old.table, elem: d}))

    def resolve(self, c: Const) -> DomainElement:
        if c.name in self.names:
            return Named(c.name)
        m = _HF_CONST.match(c.name)
        if m:
            code = int(m.group(1))
            if code < len(self.universe):
                return Crisp(HFSet(code))
            raise UnknownConstant(f"{c.name} is not in V_{self.level}")
        raise UnknownConstant(f"unknown set constant {c.name!r}")

    def same(self, other: FuzzyStructure) -> bool:
        return (
            self.universe == other.universe
            and self.grid == other.grid
            and self.names == other.names
            and {k: dict(v.table) for k, v in self.tables.items()}
            == {k: dict(v.table) for k, v in other.tables.items()}
        )


def mu_eval(st: FuzzyStructure, elem: DomainElement, fset: DomainElement) -> Fraction:
    if isinstance(fset, Crisp):
        raise NotAFuzzySet(f"mu({elem}, {fset}): {fset} is crisp")
    table = st.tables.get(fset.name)
    if table is None:
        raise SelfReference(f"mu({elem}, {fset.name}) needs {fset.name}, which is not built yet")
    return table.table[elem]


class Evaluator:
    """Classical evaluation by environments.

    A ``mu`` atom whose set argument is a crisp element has no value; it
    evaluates false and is counted in ``mu_on_crisp``, or raises
    :class:`MuOnCrisp` when ``strict`` is set.
    """

    def __init__(self, st: FuzzyStructure, strict: bool = False):
        self.st = st
        self.strict = strict
        self.mu_on_crisp = 0
        self._domain = st.domain
        self._grid = st.grid.values

    def holds(self, f: Formula, env: Env) -> bool:
        return self._eval(f, env)

    def _term(self, t, env: Env):
        if isinstance(t, Var):
            return env[t]
        if isinstance(t, Const):
            return self.st.resolve(t)
        return t

    def _eval(self, f: Formula, env: Env) -> bool:
        t = type(f)
        if t is MuEq:
            e = self._term(f.elem, env)
            s = self._term(f.set, env)
            if type(s) is Crisp:
                if self.strict:
                    raise MuOnCrisp(f"mu({e}, {s}): {s} is crisp")
                self.mu_on_crisp += 1
                return False
            return mu_eval(self.st, e, s) == self._term(f.deg, env)
        if t is And:
            return self._eval(f.left, env) and self._eval(f.right, env)
        if t is Or:
            return self._eval(f.left, env) or self._eval(f.right, env)
        if t is Not:
            return not self._eval(f.body, env)
        if t is Forall or t is Exists:
            values = self._domain if f.var.sort is Sort.SET else self._grid
            want = t is Exists
            for val in values:
                if self._eval(f.body, {**env, f.var: val}) == want:
                    return want
            return not want
        if t is CrispIn:
            a = self._term(f.lhs, env)
            b = self._term(f.rhs, env)
            return type(a) is Crisp and type(b) is Crisp and crisp_in(a.hf, b.hf)
        if t is DegLt:
            return self._term(f.a, env) < self._term(f.b, env)
        if t is DegEq or t is SetEq:
            return self._term(f.a, env) == self._term(f.b, env)
        if t is Implies:
            return (not self._eval(f.left, env)) or self._eval(f.right, env)
        if t is Iff:
            return self._eval(f.left, env) == self._eval(f.right, env)
        raise TypeError(f"not a formula: {f!r}")
