import json
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from conftest import formulas, frag_of
from fuzzynf.checker import (
    REPORT_SCHEMA,
    check_comprehension,
    check_extensionality,
    check_universality,
    comprehension_axiom,
    eval_formula,
    growing_fragments,
    prefixes,
    probe_stability,
    run_fragment,
)
from fuzzynf.model import ModelError, MuOnCrisp, Named, build_model
from fuzzynf.cli import default_corpus_text
from fuzzynf.syntax import constants_of, parse_formula, parse_theory_file, sort_check, to_text
from oracles import SubstitutionOracle, brute_max_table


def test_universal_membership_holds(default_model):
    assert eval_formula(parse_formula("forall x:U. mu(x, V_X) = 1"), default_model)


def test_degree_comparison():
    st = build_model(frag_of(""), 1, 2)
    assert eval_formula(parse_formula("1/2 < 1"), st)
    assert not eval_formula(parse_formula("1 < 1/2"), st)


def test_unbound_variable_is_an_error(default_model):
    with pytest.raises(ModelError):
        eval_formula(parse_formula("in(x, x)"), default_model)


def test_strict_evaluation_raises_on_mu_with_crisp_set(default_model):
    f = parse_formula("exists y:U. mu(V, y) = 1")
    assert eval_formula(f, default_model)
    with pytest.raises(MuOnCrisp):
        eval_formula(parse_formula("mu(V, hf0) = 1"), default_model, strict=True)


def test_comprehension_axiom_sentences_hold(default_frag, default_model):
    for e in default_frag.comprehensions:
        ax = comprehension_axiom(e.formula, e.x, e.v, e.label)
        assert eval_formula(sort_check(ax), default_model), e.label
        # the printed sentence parses back and still holds
        reparsed = parse_formula(to_text(ax), constants=[c.label for c in default_frag.comprehensions])
        assert eval_formula(reparsed, default_model)


def test_default_corpus_passes(default_frag):
    report = run_fragment(default_frag, 3, 4)
    assert report.holds
    names = [v.name for v in report.verdicts]
    assert names[:4] == ["stratification", "extensionality", "comprehension", "universality"]
    assert report.mu_on_crisp > 0


def test_minimal_model():
    report = run_fragment(frag_of(""), 1, 1)
    assert report.holds
    assert check_extensionality(build_model(frag_of(""), 1, 1)).holds


def test_distinct_sets_separated_by_empty():
    st = build_model(frag_of("comprehension A (x, v): v = 1 & in(hf0, x)"), 3, 4)
    assert check_extensionality(st).holds


def test_duplicate_formulas_collide():
    frag = frag_of("comprehension A (x, v): v = 1 & in(hf0, x)\ncomprehension B (x, v): in(hf0, x) & v = 1")
    verdict = check_extensionality(build_model(frag, 3, 4))
    assert not verdict.holds
    assert verdict.witness == {"sets": ["A", "B"]}


def test_unsatisfiable_formula_passes_via_zero_branch():
    frag = frag_of("comprehension E (x, v): v < v")
    st = build_model(frag, 3, 4)
    assert set(st.tables["E"].table.values()) == {Fraction(0)}
    assert check_comprehension(st, frag).holds


def test_bumped_entry_fails_with_witness(default_frag, default_model):
    elem = default_model.domain[2]
    bad = default_model.with_entry("half", elem, Fraction(3, 4))
    verdict = check_comprehension(bad, default_frag)
    assert not verdict.holds
    assert verdict.witness["set"] == "half"
    assert verdict.witness["element"] == str(elem)


def test_zeroed_universal_entry_names_the_element(default_model):
    bad = default_model.with_entry("V", Named("half"), Fraction(0))
    verdict = check_universality(bad)
    assert not verdict.holds and verdict.witness["element"] == "half"
    self_bad = default_model.with_entry("V", Named("V"), Fraction(1, 2))
    assert check_universality(self_bad).witness["element"] == "V"


def test_unstratified_fragment_is_rejected_before_build():
    report = run_fragment(frag_of("comprehension R (x, v): v = 1 & ~in(x, x)"), 3, 4)
    assert not report.holds
    assert [v.name for v in report.verdicts] == ["stratification"]
    assert report.verdicts[0].witness["sum"] != 0


def test_build_failures_are_reported():
    report = run_fragment(frag_of("comprehension A (x, v): mu(x, A) = v"), 3, 4)
    assert report.verdict("build").witness == {"error": "SelfReference"}


def test_reports_are_deterministic(default_frag):
    a = json.dumps(run_fragment(default_frag, 3, 4).to_json(), sort_keys=True)
    b = json.dumps(run_fragment(default_frag, 3, 4).to_json(), sort_keys=True)
    assert a == b
    assert json.loads(a)["schema"] == REPORT_SCHEMA
    assert "elapsed" not in a


def test_growing_fragments_all_pass(default_frag):
    reports = growing_fragments(default_frag, 3, 4)
    assert len(reports) == 10 and all(r.holds for r in reports)
    assert [len(r.sets) for r in reports] == list(range(2, 12))


def test_empty_corpus_gives_one_report():
    reports = growing_fragments(frag_of("axiom univ: forall x:U. mu(x, V) = 1"), 3, 4)
    assert len(reports) == 1 and reports[0].holds
    assert [v.name for v in reports[0].verdicts] == [
        "stratification",
        "extensionality",
        "comprehension",
        "universality",
        "axiom:univ",
    ]


def test_growing_halts_at_first_failure():
    frag = frag_of(
        "comprehension A (x, v): v = 1/2\n"
        "comprehension B (x, v): v = 1 & in(hf0, x)\n"
        "comprehension C (x, v): in(hf0, x) & v = 1\n"
        "comprehension D (x, v): v < v"
    )
    reports = growing_fragments(frag, 3, 4)
    assert len(reports) == 3
    assert not reports[-1].holds


def _dependencies(frag):
    labels = {e.label for e in frag.comprehensions}
    return {e.label: constants_of(e.formula) & labels for e in frag.comprehensions}


def _random_build_order(frag, rng):
    """A random order of the comprehensions in which every set follows those it mentions."""
    deps = _dependencies(frag)
    by_label = {e.label: e for e in frag.comprehensions}
    placed, order = set(), []
    while len(order) < len(by_label):
        ready = sorted(lbl for lbl in by_label if lbl not in placed and deps[lbl] <= placed)
        pick = rng.choice(ready)
        placed.add(pick)
        order.append(by_label[pick])
    return order


def test_permuted_corpus_still_passes_every_prefix(default_frag):
    rng = random.Random(7)
    for _ in range(3):
        order = _random_build_order(default_frag, rng)
        reports = growing_fragments(default_frag.with_entries(order), 3, 4)
        assert len(reports) == 10 and all(r.holds for r in reports)


@given(hs.sets(hs.integers(min_value=0, max_value=9), min_size=1))
def test_sub_fragments_of_a_passing_fragment_pass(keep):
    frag = parse_theory_file(default_corpus_text(), "default")
    comps = frag.comprehensions
    deps = _dependencies(frag)
    chosen = {comps[i].label for i in keep}
    for e in reversed(comps):  # close under dependencies
        if e.label in chosen:
            chosen |= deps[e.label]
    sub = frag.with_entries([e for e in comps if e.label in chosen])
    assert run_fragment(sub, 3, 4).holds


def test_prefixes_keep_axioms(default_frag):
    subs = prefixes(default_frag)
    assert len(subs) == 10
    assert all(len(s.axioms) == 2 for s in subs)
    assert subs[0].name == "default[:1]"


@given(f=formulas(set_consts=("V", "hf0", "hf1", "half", "has_empty", "big"), max_depth=3))
def test_environment_evaluation_matches_substitution(f, default_model):
    oracle = SubstitutionOracle(default_model)
    assert eval_formula(f, default_model) == oracle.holds(f)


def test_check_passes_iff_tables_equal_max_oracle(default_frag, default_model):
    rng = random.Random(11)
    for _ in range(30):
        entry = rng.choice(default_frag.comprehensions)
        elem = rng.choice(default_model.domain)
        deg = rng.choice(default_model.grid.values)
        st = default_model.with_entry(entry.label, elem, deg)
        agrees = all(
            dict(st.tables[e.label].table) == brute_max_table(e.formula, e.x, e.v, st)
            for e in default_frag.comprehensions
        )
        assert check_comprehension(st, default_frag).holds == agrees


def test_stability_probe(default_frag):
    stable = probe_stability(default_frag, 3, 4)
    assert stable["V"] is True
    assert set(stable) == {"V"} | {e.label for e in default_frag.comprehensions}
