"""Building the finite fuzzy model over ``V_n``.

``S = [V, A_1, ..., A_k]``: ``V`` is constant 1 on ``V_n ∪ S`` (itself
included) and each ``A_i`` gives every element the largest grid degree at
which its defining formula holds, or 0 when it holds at none.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .hierarchy import DEFAULT_CAP, build_grid, build_vn, parse_hf
from .semantics import (
    Crisp,
    DomainElement,
    Evaluator,
    FuzzySet,
    FuzzyStructure,
    ModelError,
    MuOnCrisp,
    Named,
    NotAFuzzySet,
    SelfReference,
    UnknownConstant,
    mu_eval,
)
from .stratify import UnstratifiedFormula, is_stratified
from .syntax import UNIVERSAL, Const, Formula, TheoryFragment, Var, constants_of, format_degree, free_variables

__all__ = [
    "Crisp",
    "Named",
    "DomainElement",
    "FuzzySet",
    "FuzzyStructure",
    "ModelError",
    "MuOnCrisp",
    "NotAFuzzySet",
    "SelfReference",
    "UnknownConstant",
    "UnstratifiedFormula",
    "empty_structure",
    "build_universal",
    "materialize_comprehension",
    "build_model",
    "mu_eval",
    "dump_structure",
    "load_structure",
]


def empty_structure(n: int, k_grid: int, names: Iterable[str] = (), allow_large: bool = False) -> FuzzyStructure:
    """Domain ``V_n ∪ S`` fixed, no set materialized yet."""
    names = (UNIVERSAL, *names)
    if len(set(names)) != len(names):
        raise ModelError("set names must be distinct")
    return FuzzyStructure(build_vn(n, DEFAULT_CAP, allow_large), build_grid(k_grid), names)


def build_universal(st: FuzzyStructure) -> FuzzySet:
    return FuzzySet(UNIVERSAL, {e: Fraction(1) for e in st.domain})


def _pending_name(st: FuzzyStructure) -> str:
    for n in st.names:
        if n not in st.tables:
            return n
    raise ModelError("every set in S is already materialized")


def materialize_comprehension(
    phi: Formula,
    x: Var,
    v: Var,
    st: FuzzyStructure,
    name: str | None = None,
    evaluator: Evaluator | None = None,
) -> FuzzySet:
    """Table of ``{x | phi(x, v)}`` by the max-degree rule.

    ``name`` defaults to the first set of ``S`` not yet built. ``phi`` may
    mention only already built sets; reaching the set under construction (or
    a later one) through a quantified variable raises :class:`SelfReference`.
    """
    name = name or _pending_name(st)
    extra = free_variables(phi) - {x, v}
    if extra:
        raise ModelError(f"{name}: unexpected free variable(s) {sorted(str(e) for e in extra)}")
    for c in sorted(constants_of(phi)):
        if c == name:
            raise SelfReference(f"{name} is defined in terms of itself")
        if c in st.names and c not in st.tables:
            raise UnknownConstant(f"{name} refers to {c}, which is defined later")
    ev = evaluator or Evaluator(st)
    for c in constants_of(phi):
        st.resolve(Const(c))

    descending = st.grid.values[::-1]
    table = {}
    for e in st.domain:
        best = Fraction(0)
        for d in descending:
            try:
                ok = ev.holds(phi, {x: e, v: d})
            except SelfReference as exc:
                raise SelfReference(f"{name} at {e}: {exc}") from None
            if ok:
                best = d
                break
        table[e] = best
    return FuzzySet(name, table)


def build_model(
    frag: TheoryFragment,
    n: int,
    k_grid: int,
    allow_large: bool = False,
) -> FuzzyStructure:
    """``M_n`` for the comprehension entries of ``frag``, in file order."""
    comps = frag.comprehensions
    for e in comps:
        res = is_stratified(e.formula)
        if not res:
            raise UnstratifiedFormula(e.label, res.certificate)
    st = empty_structure(n, k_grid, [e.label for e in comps], allow_large)
    st = st.with_set(build_universal(st))
    ev = Evaluator(st)
    for e in comps:
        ev.st = st
        st = st.with_set(materialize_comprehension(e.formula, e.x, e.v, st, e.label, ev))
    return st


# --------------------------------------------------------------------------
# Dump format:
#
#   structure n=<level> k=<grid> S=<|S|>
#   sets <name> <name> ...
#   <element> <set> <degree>      one line per pair, canonical order
#
# Crisp elements are written as nested braces, named ones by name.


def _render(e: DomainElement) -> str:
    return str(e)


def dump_structure(st: FuzzyStructure) -> str:
    lines = [
        f"structure n={st.level} k={st.grid.resolution} S={len(st.names)}",
        "sets " + " ".join(st.names),
    ]
    for fs in st.sets:
        for e in st.domain:
            lines.append(f"{_render(e)} {fs.name} {format_degree(fs.table[e])}")
    return "\n".join(lines) + "\n"


def load_structure(text: str, allow_large: bool = False) -> FuzzyStructure:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("structure "):
        raise ModelError("not a structure dump")
    header = dict(item.split("=", 1) for item in lines[0].split()[1:])
    n, k, size = int(header["n"]), int(header["k"]), int(header["S"])
    if not lines[1].startswith("sets "):
        raise ModelError("missing 'sets' line")
    names = lines[1].split()[1:]
    if len(names) != size or not names or names[0] != UNIVERSAL:
        raise ModelError("'sets' line disagrees with header")
    st = empty_structure(n, k, names[1:], allow_large)
    domain = set(st.domain)
    tables: dict[str, dict] = {}
    for ln in lines[2:]:
        elem_text, set_name, deg_text = ln.split()
        elem = Crisp(parse_hf(elem_text)) if elem_text.startswith("{") else Named(elem_text)
        if elem not in domain:
            raise ModelError(f"element {elem_text} is outside V_{n} ∪ S")
        if set_name not in st.names:
            raise ModelError(f"unknown set {set_name}")
        tables.setdefault(set_name, {})[elem] = Fraction(deg_text)
    for set_name in st.names:
        if set_name in tables:
            table = tables[set_name]
            if set(table) != domain:
                raise ModelError(f"table of {set_name} is not total")
            off_grid = [d for d in table.values() if d not in st.grid]
            if off_grid:
                raise ModelError(f"table of {set_name} has degree {off_grid[0]} outside the grid")
            st = st.with_set(FuzzySet(set_name, table))
    return st
