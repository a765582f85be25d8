"""Model checking the restricted fuzzy NF axioms in finite structures."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .model import build_model
from .semantics import (
    Evaluator,
    FuzzyStructure,
    ModelError,
    Named,
    render_value,
)
from .stratify import StratResult, UnstratifiedFormula, is_stratified
from .syntax import (
    UNIVERSAL,
    And,
    Const,
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
    Sort,
    TheoryEntry,
    TheoryFragment,
    Var,
    _all_names,
    free_variables,
    fresh_name,
    language_of,
    rename_free,
)

REPORT_SCHEMA = "fuzzynf.check-report/1"
MU_TYPING_NOTE = "mu(x, A) = d is stratified like x in A: type(x) = type(A) - 1"


def eval_formula(f: Formula, st: FuzzyStructure, env: dict | None = None, strict: bool = False) -> bool:
    """Truth of ``f`` in ``st``; set quantifiers range over ``V_n ∪ S``."""
    env = env or {}
    missing = free_variables(f) - set(env)
    if missing:
        raise ModelError(f"unbound free variable(s): {sorted(v.name for v in missing)}")
    return Evaluator(st, strict=strict).holds(f, env)


@dataclass(frozen=True)
class Verdict:
    name: str
    holds: bool
    witness: dict | None = None
    detail: str = ""
    findings: tuple = ()

    def to_json(self) -> dict:
        out = {"holds": self.holds, "witness": self.witness}
        if self.detail:
            out["detail"] = self.detail
        if self.findings:
            out["findings"] = list(self.findings)
        return out


def check_extensionality(st: FuzzyStructure) -> Verdict:
    """Distinct members of ``S`` must differ somewhere on ``V_n ∪ S``."""
    domain = st.domain
    sets = st.sets
    collisions = []
    for i, a in enumerate(sets):
        for b in sets[i + 1 :]:
            if all(a.table[e] == b.table[e] for e in domain):
                collisions.append({"sets": [a.name, b.name]})
    if collisions:
        return Verdict(
            "extensionality",
            False,
            collisions[0],
            f"{len(collisions)} pair(s) of distinct sets with identical tables",
            tuple(collisions),
        )
    return Verdict("extensionality", True, detail=f"{len(sets)} set(s) pairwise distinct")


def comprehension_body(phi: Formula, x: Var, v: Var, set_name: str) -> tuple[Formula, Var]:
    """The comprehension biconditional for ``set_name`` with ``x`` and a degree variable free.

    ``mu(x, A) = d <-> (phi(x,d) & forall w. (d < w -> ~phi(x,w))
                         & exists w. (~(d < w) & phi(x,w)))
                        | (d = 0 & forall w. ~phi(x,w))``
    """
    taken = _all_names(phi) | {x.name, v.name}
    d = Var(fresh_name("d", taken), Sort.DEG)
    taken.add(d.name)
    ws = []
    for _ in range(3):
        w = Var(fresh_name("w", taken), Sort.DEG)
        taken.add(w.name)
        ws.append(w)

    def at(t):
        return rename_free(phi, v, t)

    attained = And(
        And(at(d), Forall(ws[0], Implies(DegLt(d, ws[0]), Not(at(ws[0]))))),
        Exists(ws[1], And(Not(DegLt(d, ws[1])), at(ws[1]))),
    )
    empty = And(DegEq(d, Fraction(0)), Forall(ws[2], Not(at(ws[2]))))
    return Iff(MuEq(x, Const(set_name), d), Or(attained, empty)), d


def comprehension_axiom(phi: Formula, x: Var, v: Var, set_name: str) -> Formula:
    """Closed comprehension axiom instance for ``set_name``."""
    body, d = comprehension_body(phi, x, v, set_name)
    return Forall(x, Forall(d, body))


def check_comprehension(st: FuzzyStructure, frag: TheoryFragment, evaluator: Evaluator | None = None) -> Verdict:
    """Every (set, element, degree) instance of the biconditional holds."""
    ev = evaluator or Evaluator(st)
    failures = []
    for entry in frag.comprehensions:
        if entry.label not in st.tables:
            failures.append({"set": entry.label, "element": None, "degree": None, "table": None})
            continue
        body, d = comprehension_body(entry.formula, entry.x, entry.v, entry.label)
        table = st.tables[entry.label].table
        for e in st.domain:
            for deg in st.grid:
                if not ev.holds(body, {entry.x: e, d: deg}):
                    failures.append(
                        {
                            "set": entry.label,
                            "element": str(e),
                            "degree": render_value(deg),
                            "table": render_value(table[e]),
                        }
                    )
    n_inst = len(frag.comprehensions) * len(st.domain) * len(st.grid)
    if failures:
        return Verdict(
            "comprehension",
            False,
            failures[0],
            f"{len(failures)} of {n_inst} instance(s) fail",
            tuple(failures),
        )
    return Verdict("comprehension", True, detail=f"{n_inst} instance(s) hold")


def check_universality(st: FuzzyStructure) -> Verdict:
    """``mu(x, V) = 1`` for every ``x`` in ``V_n ∪ S``, and ``mu(V, V) = 1``."""
    if UNIVERSAL not in st.tables:
        return Verdict("universality", False, {"element": None}, "V is not materialized")
    table = st.tables[UNIVERSAL].table
    bad = [
        {"element": str(e), "degree": render_value(table[e])} for e in st.domain if table[e] != 1
    ]
    if table[Named(UNIVERSAL)] != 1:
        self_bad = {"element": UNIVERSAL, "degree": render_value(table[Named(UNIVERSAL)])}
        return Verdict("universality", False, self_bad, "mu(V, V) != 1", tuple(bad))
    if bad:
        return Verdict("universality", False, bad[0], f"{len(bad)} element(s) below degree 1", tuple(bad))
    return Verdict("universality", True, detail=f"mu(x, V) = 1 on all {len(st.domain)} element(s)")


def check_axiom_entry(st: FuzzyStructure, entry: TheoryEntry, evaluator: Evaluator | None = None) -> Verdict:
    name = f"axiom:{entry.label}"
    if free_variables(entry.formula):
        return Verdict(name, False, None, "axiom has free variables")
    try:
        ok = (evaluator or Evaluator(st)).holds(entry.formula, {})
    except ModelError as exc:
        return Verdict(name, False, None, str(exc))
    return Verdict(name, ok, None if ok else {"axiom": entry.label}, "" if ok else "sentence is false")


@dataclass
class CheckReport:
    fragment: str
    level: int
    grid: int
    sets: list[str] = field(default_factory=list)
    formulas: dict = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    mu_on_crisp: int = 0
    elapsed: float = 0.0

    @property
    def holds(self) -> bool:
        return bool(self.verdicts) and all(v.holds for v in self.verdicts)

    def verdict(self, name: str) -> Verdict | None:
        return next((v for v in self.verdicts if v.name == name), None)

    def to_json(self) -> dict:
        """Deterministic: timings are left out."""
        return {
            "schema": REPORT_SCHEMA,
            "fragment": self.fragment,
            "level": self.level,
            "grid": self.grid,
            "sets": list(self.sets),
            "formulas": self.formulas,
            "verdicts": {v.name: v.to_json() for v in self.verdicts},
            "mu_on_crisp": self.mu_on_crisp,
            "notes": [MU_TYPING_NOTE],
            "result": "PASS" if self.holds else "FAIL",
        }

    def to_text(self) -> str:
        lines = [f"fragment {self.fragment}: n={self.level} k={self.grid} |S|={len(self.sets)}"]
        for v in self.verdicts:
            status = "PASS" if v.holds else "FAIL"
            line = f"  {v.name:<24} {status}"
            if v.detail:
                line += f"  ({v.detail})"
            lines.append(line)
            if not v.holds and v.witness is not None:
                wit = ", ".join(f"{k}={val}" for k, val in v.witness.items())
                lines.append(f"    witness: {wit}")
        lines.append(f"  mu on crisp set argument: {self.mu_on_crisp} instantiation(s)")
        lines.append(f"  note: {MU_TYPING_NOTE}")
        lines.append(f"  fragment result: {'PASS' if self.holds else 'FAIL'}")
        return "\n".join(lines)


def _stratification(frag: TheoryFragment) -> tuple[dict, Verdict]:
    formulas = {}
    bad = []
    for e in frag.comprehensions:
        res: StratResult = is_stratified(e.formula)
        formulas[e.label] = {"language": language_of(e.formula), **res.to_json()}
        if not res:
            bad.append({"formula": e.label, **res.certificate.to_json()})
    if bad:
        return formulas, Verdict("stratification", False, bad[0], f"{len(bad)} formula(s) unstratified", tuple(bad))
    return formulas, Verdict("stratification", True, detail=f"{len(formulas)} formula(s) stratified")


def check_structure(st: FuzzyStructure, frag: TheoryFragment) -> CheckReport:
    """All checks against an existing (possibly loaded) structure."""
    start = time.perf_counter()
    formulas, strat = _stratification(frag)
    report = CheckReport(frag.name, st.level, st.grid.resolution, list(st.names), formulas, [strat])
    ev = Evaluator(st)
    report.verdicts += [
        check_extensionality(st),
        check_comprehension(st, frag, ev),
        check_universality(st),
    ]
    report.verdicts += [check_axiom_entry(st, a, ev) for a in frag.axioms]
    report.mu_on_crisp = ev.mu_on_crisp
    report.elapsed = time.perf_counter() - start
    return report


def build_and_check(
    frag: TheoryFragment, n: int, k_grid: int, allow_large: bool = False
) -> tuple[FuzzyStructure | None, CheckReport]:
    """Build ``M_n`` for ``frag`` and run every check.

    The structure is ``None`` when the fragment is rejected before or during
    the build; the report then says why.
    """
    start = time.perf_counter()
    formulas, strat = _stratification(frag)
    names = [UNIVERSAL] + [e.label for e in frag.comprehensions]
    verdicts = [strat]
    if strat.holds:
        try:
            st = build_model(frag, n, k_grid, allow_large)
        except (ModelError, UnstratifiedFormula) as exc:
            verdicts.append(Verdict("build", False, {"error": type(exc).__name__}, str(exc)))
        else:
            report = check_structure(st, frag)
            report.elapsed = time.perf_counter() - start
            return st, report
    return None, CheckReport(frag.name, n, k_grid, names, formulas, verdicts, elapsed=time.perf_counter() - start)


def run_fragment(frag: TheoryFragment, n: int, k_grid: int, allow_large: bool = False) -> CheckReport:
    """Build ``M_n`` for ``frag`` and run every check; unstratified fragments are never built."""
    return build_and_check(frag, n, k_grid, allow_large)[1]


def prefixes(frag: TheoryFragment) -> list[TheoryFragment]:
    """Fragments keeping every axiom and the first 1, 2, ... comprehensions."""
    comps = frag.comprehensions
    sizes = range(1, len(comps) + 1) if comps else [0]
    out = []
    for size in sizes:
        keep = {e.label for e in comps[:size]}
        entries = [e for e in frag.entries if e.kind != "comprehension" or e.label in keep]
        out.append(frag.with_entries(entries, f"{frag.name}[:{size}]"))
    return out


def growing_fragments(frag: TheoryFragment, n: int, k_grid: int, allow_large: bool = False) -> list[CheckReport]:
    """Reports for increasing prefixes; stops after the first failing one."""
    reports = []
    for sub in prefixes(frag):
        report = run_fragment(sub, n, k_grid, allow_large)
        reports.append(report)
        if not report.holds:
            break
    return reports


def probe_stability(frag: TheoryFragment, n: int, k_grid: int, allow_large: bool = False) -> dict[str, bool]:
    """Whether each set's table on ``V_n ∪ S`` is unchanged when built over ``V_{n+1}``."""
    small = build_model(frag, n, k_grid, allow_large)
    large = build_model(frag, n + 1, k_grid, allow_large)
    return {
        fs.name: all(large.tables[fs.name].table[e] == fs.table[e] for e in small.domain)
        for fs in small.sets
    }


def entries_of(items: Iterable[TheoryEntry], name: str = "corpus") -> TheoryFragment:
    return TheoryFragment(name, tuple(items))
