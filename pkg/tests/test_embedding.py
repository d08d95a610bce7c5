from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import pencil_roots_exact, pencil_svals_mp
from muntz.embedding import (
    classify_embedding,
    embedding_svals,
    essential_norm_estimate,
    gram_pair,
    lebesgue_gram,
    liminf_test,
    liminf_trend,
    mu_gram,
    operator_norm_estimate,
    schatten_qnorm,
)
from muntz.exponents import geometric
from muntz.linalg import IllConditionedError
from muntz.measure import lebesgue, literal, pullback

HALF = literal("piecewise((x <= 0.5, 1), 0)", label="lebesgue on [0, 1/2]")


def test_lebesgue_gram_entries():
    b = lebesgue_gram([1.0, 2.0], 2)
    assert np.allclose(b, [[1 / 3, 1 / 4], [1 / 4, 1 / 5]], rtol=1e-15)
    d = np.sqrt(np.array([3.0, 5.0]))
    assert np.allclose(lebesgue_gram([1.0, 2.0], 2, "normalized"), d[:, None] * b * d[None, :])


def test_mu_gram_examples():
    a, _ = mu_gram(geometric(2, 8), 8, lebesgue())
    assert np.allclose(a, lebesgue_gram(geometric(2, 8), 8), rtol=1e-12)
    a, _ = mu_gram([1.0, 2.0], 2, literal(None, [(0.5, 1.0)]))
    assert np.allclose(a, [[1 / 4, 1 / 8], [1 / 8, 1 / 16]], rtol=1e-15)


def test_gram_pair_invariants():
    pair = gram_pair(geometric(2, 10), 10, literal("1 - x"))
    assert pair.check() == []


def test_lebesgue_singular_values_are_one():
    spec = embedding_svals(geometric(2, 12), 12, lebesgue())
    assert np.allclose(spec.values, 1.0, atol=1e-8)


@pytest.mark.parametrize("c", [0.25, 2.0, 9.0])
def test_scaled_lebesgue(c):
    spec = embedding_svals(geometric(2, 8), 8, lebesgue(c))
    assert np.allclose(spec.values, math.sqrt(c), rtol=1e-8)


def test_pullback_of_half_map_against_high_precision_oracle():
    lam = [2.0**k for k in range(1, 7)]
    spec = embedding_svals(lam, 6, pullback("x/2"), "raw")
    # int (x/2)^s dx = 2^-s / (s+1), exactly.
    A = [[mpmath.mpf(2) ** -(a + b) / (a + b + 1) for b in lam] for a in lam]
    B = [[mpmath.mpf(1) / (a + b + 1) for b in lam] for a in lam]
    ref = pencil_svals_mp(A, B)
    # ||f(x/2)||^2 = 2 * int_0^{1/2} f^2, so the top value sits below sqrt(2).
    assert spec.values[0] < math.sqrt(2)
    assert np.allclose(spec.values, ref, rtol=1e-6, atol=1e-14)
    # Decay faster than geometric: consecutive ratios shrink.
    ratios = spec.values[1:] / spec.values[:-1]
    assert np.all(np.diff(ratios) < 0)


def test_normalizations_give_the_same_spectrum():
    mu = literal("1 - x")
    vals = [embedding_svals(geometric(2, 6), 6, mu, norm).values for norm in ("raw", "normalized", "riesz")]
    assert np.allclose(vals[0], vals[1], rtol=1e-9)
    assert np.allclose(vals[1], vals[2], rtol=1e-9)


def test_raw_scaling_refuses_ill_conditioned_sections():
    with pytest.raises(IllConditionedError):
        embedding_svals([float(k) for k in range(1, 16)], 15, lebesgue(), "raw")


@pytest.mark.parametrize(
    "name, mu, moment",
    [
        ("lebesgue", lebesgue(), lambda s: sp.Rational(1, s + 1)),
        ("1-x", literal("1 - x"), lambda s: sp.Rational(1, s + 1) - sp.Rational(1, s + 2)),
        ("atom", literal(None, [(0.5, 1.0)]), lambda s: sp.Rational(1, 2) ** s),
    ],
)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_exact_oracle(name, mu, moment, n):
    lam = [1, 2, 4, 8, 16][:n]
    A = [[moment(a + b) for b in lam] for a in lam]
    B = [[sp.Rational(1, a + b + 1) for b in lam] for a in lam]
    ref = np.sqrt(np.maximum(pencil_roots_exact(A, B), 0.0))
    got = embedding_svals([float(v) for v in lam], n, mu).values
    assert np.max(np.abs(got - ref)) <= 1e-8


def test_operator_norm_examples():
    tr = operator_norm_estimate(geometric(2, 10), lebesgue(), range(2, 11))
    assert np.allclose(tr.s1, 1.0, atol=1e-8) and tr.verdict == "bounded evidence"
    tr = operator_norm_estimate(geometric(2, 8), literal(None, [(1.0, 1.0)]), range(2, 9))
    assert tr.verdict == "divergence evidence"
    assert all(b > a for a, b in zip(tr.s1, tr.s1[1:]))
    tr = operator_norm_estimate(geometric(2, 10), literal("1 - x"), range(2, 11))
    assert tr.verdict == "bounded evidence"


def test_essential_norm_of_square_pullback():
    tr = essential_norm_estimate(geometric(2, 12), pullback("x^2"), 12, range(2, 9))
    assert all(abs(e - math.sqrt(0.5)) <= 0.05 for e in tr.values)
    assert tr.trend == "decreasing"


def test_essential_norm_compact_support_goes_to_zero():
    tr = essential_norm_estimate(geometric(2, 10), HALF, 10, range(0, 7))
    assert tr.values[-1] < 1e-6 and tr.trend == "decreasing"


def test_schatten_examples():
    assert schatten_qnorm([1.0, 0.0, 0.0, 0.0], 2) == (1.0, True)
    total, _ = schatten_qnorm([2.0**-k for k in range(1, 40)], 1)
    assert total == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(ValueError):
        schatten_qnorm([1.0], 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=20), st.floats(0.1, 4))
def test_schatten_is_a_power_sum(values, q):
    total, _ = schatten_qnorm(values, q)
    expected = sum(v**q for v in values) ** (1 / q)
    assert total == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_liminf_examples():
    pairs = liminf_test(geometric(2, 12), lebesgue())
    assert all(r == pytest.approx(1.0, abs=1e-12) for _, r in pairs)
    pairs = liminf_test(geometric(2, 12), literal("2*(1 - x)"))
    assert all(r == pytest.approx(1 / lam, rel=1e-9) for lam, r in pairs)
    assert liminf_trend(pairs)["to_zero"]
    model = [(lam, 2 * math.sqrt(lam)) for lam in geometric(2, 12)]
    assert liminf_trend(model)["diverging"]


def test_classify_lebesgue():
    rep = classify_embedding(geometric(2, 12), lebesgue())
    assert rep.verdicts["bounded"].value == "yes" and any("rule 3" in r for r in rep.verdicts["bounded"].rules)
    assert rep.verdicts["compact"].value == "no" and any("rule 7" in r for r in rep.verdicts["compact"].rules)


def test_classify_compact_support():
    rep = classify_embedding(geometric(2, 10), HALF)
    assert rep.verdicts["schatten_all_q"].value == "yes"
    assert any("rule 2" in r for r in rep.verdicts["schatten_all_q"].rules)
    assert rep.verdicts["compact"].value == "yes" and rep.verdicts["bounded"].value == "yes"


def test_classify_atom_at_one():
    rep = classify_embedding(geometric(2, 10), literal(None, [(1.0, 1.0)]))
    assert rep.verdicts["lambda2_embedding"].value == "no"
    assert any("rule 1" in r for r in rep.verdicts["lambda2_embedding"].rules)


def test_classification_report_is_json_ready():
    import json

    rep = classify_embedding(geometric(2, 8), literal("1 - x"), spectra=False)
    json.dumps(rep.to_dict(), allow_nan=False)


@pytest.mark.parametrize(
    "mu", [lebesgue(), literal("1 - x"), HALF, pullback("x^2"), literal(None, [(0.5, 1.0)])],
    ids=["lebesgue", "1-x", "half", "pullback-x2", "atom"],
)
def test_interlacing_in_section_size(mu):
    seq = geometric(2, 12)
    spectra = [embedding_svals(seq, n, mu).values for n in range(1, 13)]
    for k in range(12):
        col = [spec[k] for spec in spectra[k:]]
        assert all(b >= a * (1 - 1e-9) - 1e-13 for a, b in zip(col, col[1:]))


def test_schatten_monotone_in_q():
    spec = embedding_svals(geometric(2, 10), 10, literal("1 - x"))
    qs = [0.25, 0.5, 1.0, 2.0, 4.0]
    norms = [schatten_qnorm(spec, q)[0] for q in qs]
    assert all(a >= b for a, b in zip(norms, norms[1:]))
