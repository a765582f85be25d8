from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from fuzzynf.hierarchy import (
    EMPTY,
    CapExceeded,
    HFSet,
    build_grid,
    build_vn,
    crisp_in,
    level_size,
    parse_hf,
)
from oracles import canon, canon_hf, powerset_levels


@pytest.mark.parametrize("n, size", [(0, 0), (1, 1), (2, 2), (3, 4), (4, 16)])
def test_level_sizes(n, size):
    assert len(build_vn(n)) == size == level_size(n)


def test_level_five_needs_override():
    with pytest.raises(CapExceeded):
        build_vn(5)
    assert len(build_vn(5, allow_large=True)) == 65536
    with pytest.raises(CapExceeded):
        build_vn(6, allow_large=True)


@pytest.mark.parametrize("n", range(5))
def test_levels_match_power_set_construction(n):
    oracle = powerset_levels(n)[n]
    ours = build_vn(n).elements
    assert {canon(s) for s in oracle} == {canon_hf(h) for h in ours}
    by_text = {canon(s): s for s in oracle}
    for a in ours:
        for b in ours:
            assert crisp_in(a, b) == (by_text[canon_hf(a)] in by_text[canon_hf(b)])


def test_no_membership_cycles_up_to_level_four():
    elems = build_vn(4).elements
    edges = {a: [b for b in elems if crisp_in(a, b)] for a in elems}
    state = {}

    def visit(node):
        state[node] = "open"
        for nxt in edges[node]:
            assert state.get(nxt) != "open", f"cycle through {nxt}"
            if nxt not in state:
                visit(nxt)
        state[node] = "done"

    for e in elems:
        if e not in state:
            visit(e)
    assert not any(crisp_in(e, e) for e in elems)


def test_rank_is_below_level():
    for n in range(1, 5):
        assert all(h.rank < n for h in build_vn(n).elements)


def test_small_sets():
    one = HFSet.of(EMPTY)
    assert one.code == 1 and one.render() == "{{}}"
    two = HFSet.of(EMPTY, one)
    assert two.render() == "{{},{{}}}"
    assert EMPTY in two and one in two and two not in two


@given(hs.integers(min_value=0, max_value=2**16 - 1))
def test_render_parse_round_trip(code):
    h = HFSet(code)
    assert parse_hf(h.render()) == h


@pytest.mark.parametrize("text", ["", "{", "{}}", "{x}", "{{}"])
def test_bad_hf_text(text):
    with pytest.raises(ValueError):
        parse_hf(text)


def test_grids():
    assert build_grid(1).values == (Fraction(0), Fraction(1))
    assert build_grid(4).values == tuple(Fraction(i, 4) for i in range(5))
    assert Fraction(1, 2) in build_grid(4) and Fraction(1, 3) not in build_grid(4)
    with pytest.raises(ValueError):
        build_grid(0)
