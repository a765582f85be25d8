from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as hs

from fuzzynf.cli import default_corpus_text
from fuzzynf.model import build_model
from fuzzynf.syntax import (
    And,
    Const,
    CrispIn,
    DegEq,
    DegLt,
    Exists,
    Forall,
    Iff,
    Implies,
    MuEq,
    Not,
    Or,
    SetEq,
    Sort,
    Var,
    parse_theory_file,
)

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

DEGREES = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


@pytest.fixture(scope="session")
def default_frag():
    return parse_theory_file(default_corpus_text(), "default")


@pytest.fixture(scope="session")
def default_model(default_frag):
    return build_model(default_frag, 3, 4)


def frag_of(text: str, name: str = "t"):
    return parse_theory_file(text, name)


@hs.composite
def formulas(draw, set_consts=("V", "hf0", "hf1"), free_sets=(), free_degs=(), max_depth=4, degrees=DEGREES):
    """Well-sorted formulas; binders get fresh names so printing and parsing round-trip."""
    counter = [0]

    def fresh(prefix):
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def sterm(scope_s):
        pool = [Const(c) for c in set_consts] + list(scope_s)
        return draw(hs.sampled_from(pool))

    def dterm(scope_d):
        pool = list(degrees) + list(scope_d)
        return draw(hs.sampled_from(pool))

    def go(depth, scope_s, scope_d):
        choices = ["in", "mu", "lt", "deq", "seq"]
        if depth > 0:
            choices += ["not", "and", "or", "imp", "iff", "all", "ex"]
        kind = draw(hs.sampled_from(choices))
        if kind == "in":
            return CrispIn(sterm(scope_s), sterm(scope_s))
        if kind == "mu":
            return MuEq(sterm(scope_s), sterm(scope_s), dterm(scope_d))
        if kind == "lt":
            return DegLt(dterm(scope_d), dterm(scope_d))
        if kind == "deq":
            return DegEq(dterm(scope_d), dterm(scope_d))
        if kind == "seq":
            return SetEq(sterm(scope_s), sterm(scope_s))
        if kind == "not":
            return Not(go(depth - 1, scope_s, scope_d))
        if kind in ("and", "or", "imp", "iff"):
            op = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[kind]
            return op(go(depth - 1, scope_s, scope_d), go(depth - 1, scope_s, scope_d))
        q = Forall if kind == "all" else Exists
        if draw(hs.booleans()):
            var = Var(fresh("s"), Sort.SET)
            return q(var, go(depth - 1, scope_s + [var], scope_d))
        var = Var(fresh("w"), Sort.DEG)
        return q(var, go(depth - 1, scope_s, scope_d + [var]))

    return go(max_depth, list(free_sets), list(free_degs))


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance criteria lines after the run, when that module ran."""
    modules = [m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")]
    results = next((m.RESULTS for m in modules if hasattr(m, "RESULTS")), None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
