from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muntz.exponents import (
    ExponentSequence,
    TailModel,
    UndefinedInputError,
    best_block_ratio,
    block_ratio_decay,
    closure_check,
    gap_condition,
    geometric,
    lacunarity,
    muntz_partial_sum,
    parse_sequence,
    quasilacunary,
)


def seq(*vals):
    return ExponentSequence(tuple(vals))


def test_geometric_partial_sum_with_tail():
    s = ExponentSequence(geometric(2, 10).values, TailModel("geometric", 2.0))
    res = muntz_partial_sum(s)
    assert res.partial == pytest.approx(1 - 2.0**-10, abs=1e-15)
    assert res.verdict == "summable"
    assert res.tail_bound == pytest.approx(2.0**-10)


def test_partial_sum_without_tail_is_inconclusive():
    assert muntz_partial_sum(parse_sequence("range:n=10")).verdict == "inconclusive"


def test_asserted_tail_passes_through():
    res = muntz_partial_sum(parse_sequence("pow:p=2,n=50", tail="asserted"))
    assert res.verdict == "summable" and res.basis == "user-asserted"


def test_zero_exponent_is_skipped_with_warning():
    res = muntz_partial_sum(seq(0, 1, 2))
    assert res.partial == 1.5
    assert res.warnings


@pytest.mark.parametrize(
    "vals, gap",
    [((1, 2, 4, 8), 1.0), ((1, 1.5, 1.75), 0.25), ((0, 0.5, 1), 0.5)],
)
def test_gap_condition(vals, gap):
    res = gap_condition(seq(*vals))
    assert res.inf_gap == gap and res.holds_on_prefix


def test_gap_condition_needs_two_terms():
    with pytest.raises(UndefinedInputError):
        gap_condition(seq(3))


@pytest.mark.parametrize(
    "s, gamma",
    [(geometric(2, 12), 2.0), (seq(1, 2, 3, 4), 4 / 3), (seq(1, 10, 100), 10.0)],
)
def test_lacunarity(s, gamma):
    res = lacunarity(s)
    assert res.gamma == pytest.approx(gamma)
    assert res.lacunary_on_prefix
    assert "prefix" in res.caveat


def test_lacunarity_rejects_zero():
    with pytest.raises(UndefinedInputError):
        lacunarity(seq(0, 1, 2))


def test_lacunary_is_quasilacunary_with_block_one():
    assert quasilacunary(geometric(3, 15), 1)


def test_doubling_blocks_are_quasilacunary():
    s = ExponentSequence(tuple(2.0**j * m for j in range(8) for m in (1.0, 1.1, 1.2)))
    assert quasilacunary(s, 3)
    assert best_block_ratio(s, 3) >= 2.0 - 1e-12


def test_integers_are_not_quasilacunary():
    s = parse_sequence("range:n=30")
    assert not quasilacunary(s, 3)
    assert block_ratio_decay(s, 3) < -0.5


def test_polynomial_growth_is_not_quasilacunary():
    assert not quasilacunary(parse_sequence("pow:p=2,n=40"), 3)


def test_quasilacunary_min_gamma():
    s = geometric(2, 10)
    assert quasilacunary(s, 1, min_gamma=1.9)
    assert not quasilacunary(s, 1, min_gamma=2.5)


def test_closure_powers_of_two():
    rep = closure_check(geometric(2, 12), 2.0)
    assert rep.closed_on_prefix and rep.checked > 0


def test_closure_reports_first_failure():
    rep = closure_check(geometric(2, 12), 3.0)
    assert not rep.closed_on_prefix
    lam, m, prod = rep.first_failure
    assert (lam, m, prod) == (2.0, 1, 6.0)


def test_closure_integers():
    assert closure_check(parse_sequence("range:n=16"), 2.0).closed_on_prefix


@pytest.mark.parametrize(
    "text, expected",
    [
        ("geom:2,4", (2, 4, 8, 16)),
        ("geom:base=3,n=3,start=0", (1, 3, 9)),
        ("pow:p=2,n=3", (1, 4, 9)),
        ("range:n=3", (1, 2, 3)),
        ("list:1,2.5,4", (1, 2.5, 4)),
        ("[1, 2, 4]", (1, 2, 4)),
    ],
)
def test_parse_sequence(text, expected):
    assert parse_sequence(text).values == tuple(float(v) for v in expected)


@pytest.mark.parametrize("bad", ["geom:2", "foo:1", "list:2,1", "[1, -1]", "nonsense"])
def test_parse_sequence_errors(bad):
    with pytest.raises((ValueError, KeyError)):
        parse_sequence(bad)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 1e4), min_size=2, max_size=20, unique=True))
def test_lacunarity_gamma_is_min_ratio(vals):
    vals = sorted(vals)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        return
    s = ExponentSequence(tuple(vals))
    ratios = [b / a for a, b in zip(vals, vals[1:])]
    assert lacunarity(s).gamma == pytest.approx(min(ratios))
    # A block bound never makes the chain ratio worse than the plain ratio.
    assert best_block_ratio(s, 2) >= min(ratios) * (1 - 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.05, 8.0), st.integers(6, 30))
def test_geometric_sequences_are_quasilacunary(ratio, n):
    assert quasilacunary(geometric(ratio, n, start=0), 2)
    assert math.isclose(lacunarity(geometric(ratio, n, start=0)).gamma, ratio, rel_tol=1e-9)
