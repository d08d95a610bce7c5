from __future__ import annotations

import json
import math

import mpmath
import numpy as np
import pytest

from _oracles import pencil_svals_mp
from muntz.compop import (
    classify_compop,
    compop_gram,
    compop_svals,
    compop_tail_estimates,
    dini,
    ess_max_points,
    essential_norm_formula,
    holder_contact,
)
from muntz.embedding import lebesgue_gram, operator_norm_estimate
from muntz.exponents import geometric
from muntz.measure import pullback, tail_mass

GEOM = geometric(2, 12)
TENT = "1 - abs(2*x - 1)"
CUSP = "1 - sqrt(abs(x - 1/2))"
BUMP = "1 - (x - 1/2)^2"


# --------------------------------------------------------------------------- #
# Gram matrices and spectra
# --------------------------------------------------------------------------- #


def test_identity_map_gives_lebesgue_gram():
    a, err = compop_gram("x", GEOM, 8)
    assert np.allclose(a, lebesgue_gram(GEOM, 8), rtol=1e-12) and err < 1e-12


def test_square_map_single_entry():
    a, _ = compop_gram("x^2", [1.0], 1)
    assert a[0, 0] == pytest.approx(1 / 5, rel=1e-13)


def test_weight_shifts_the_cauchy_kernel():
    lam = np.array([1.0, 2.0, 4.0])
    a, _ = compop_gram("x", lam, 3, psi="x")
    assert np.allclose(a, 1 / (lam[:, None] + lam[None, :] + 3), rtol=1e-12)


def test_map_leaving_the_unit_interval_is_rejected():
    with pytest.raises(ValueError):
        compop_gram("2*x", GEOM, 4)


def test_identity_map_singular_values():
    assert np.allclose(compop_svals("x", GEOM, 12).values, 1.0, atol=1e-8)


def test_half_map_against_high_precision_oracle():
    lam = geometric(2, 6).values
    spec = compop_svals("x/2", lam, 6, normalization="raw")
    A = [[mpmath.mpf(2) ** -(a + b) / (a + b + 1) for b in lam] for a in lam]
    B = [[mpmath.mpf(1) / (a + b + 1) for b in lam] for a in lam]
    assert np.allclose(spec.values, pencil_svals_mp(A, B), rtol=1e-6, atol=1e-14)


@pytest.mark.parametrize("phi", [TENT, "x^2", "x/2", CUSP, "1 - 2*abs(x - 1/2)", "x^3"])
def test_routes_agree(phi):
    direct = compop_svals(phi, GEOM, 10).values
    pulled = compop_svals(phi, GEOM, 10, route="pullback").values
    assert np.max(np.abs(direct - pulled)) <= 1e-5


def test_unknown_route():
    with pytest.raises(ValueError):
        compop_svals("x", GEOM, 4, route="sideways")


def test_tail_estimates_match_sliced_definition():
    tr = compop_tail_estimates("x^2", GEOM, 10, [2, 5])
    for k, e in zip(tr.n0_list, tr.values):
        full = compop_svals("x^2", list(geometric(2, 10).values)[k:], 10 - k)
        assert e == pytest.approx(full.values[0], rel=1e-8)


# --------------------------------------------------------------------------- #
# Maximum points, Dini derivatives, contact fits
# --------------------------------------------------------------------------- #


def test_ess_max_examples():
    em = ess_max_points("x")
    assert em.alpha == pytest.approx(1.0) and em.points == [pytest.approx(1.0)]
    em = ess_max_points("1 - abs(x - 1/2)")
    assert em.alpha == pytest.approx(1.0) and em.points == [pytest.approx(0.5, abs=1e-9)]
    em = ess_max_points("min(2*x, 1)")
    assert not em.finite and em.intervals[0] == (pytest.approx(0.5, abs=1e-9), pytest.approx(1.0))
    em = ess_max_points("x/2")
    assert em.alpha == pytest.approx(0.5) and 0.0 <= em.alpha <= 1.0


def test_ess_max_two_points():
    em = ess_max_points("1 - abs(4*x*(1 - x) - 3/4)*4/3")
    assert em.alpha == pytest.approx(1.0)
    # 4x(1-x) = 3/4 at x = 1/4 and 3/4.
    assert em.points == [pytest.approx(0.25, abs=1e-8), pytest.approx(0.75, abs=1e-8)]


def test_dini_examples():
    d = dini("x", 1.0)
    assert d.D_minus_inf == pytest.approx(1.0, abs=1e-6) and d.D_minus_sup == pytest.approx(1.0, abs=1e-6)
    assert d.D_plus_inf is None and d.D_plus_sup is None
    d = dini("1 - abs(x - 1/2)", 0.5)
    assert (d.D_minus_inf, d.D_minus_sup) == (pytest.approx(1.0, abs=1e-6), pytest.approx(1.0, abs=1e-6))
    assert (d.D_plus_inf, d.D_plus_sup) == (pytest.approx(-1.0, abs=1e-6), pytest.approx(-1.0, abs=1e-6))
    d = dini(CUSP, 0.5)
    assert d.D_minus_inf == d.D_minus_sup == math.inf
    assert d.D_plus_inf == d.D_plus_sup == -math.inf
    assert d.to_dict()["D_minus_inf"] == "+inf"


def test_dini_smooth_maximum_is_zero():
    d = dini(BUMP, 0.5)
    assert d.D_minus_sup == 0.0 and d.D_plus_inf == 0.0


def test_dini_orders_and_range():
    for phi, x0 in [("x^2", 1.0), (TENT, 0.5), ("x*(2 - x)", 1.0)]:
        d = dini(phi, x0)
        if d.D_minus_inf is not None:
            assert d.D_minus_inf <= d.D_minus_sup
        if d.D_plus_inf is not None:
            assert d.D_plus_inf <= d.D_plus_sup
    with pytest.raises(ValueError):
        dini("x", 1.5)


def test_holder_examples():
    h = holder_contact("1 - abs(x - 1/2)", 0.5)
    assert h.s == pytest.approx(1.0, abs=1e-6) and h.c == pytest.approx(1.05, rel=1e-3) and h.holds
    h = holder_contact(CUSP, 0.5)
    assert h.s == pytest.approx(2.0, abs=1e-4)
    h = holder_contact(BUMP, 0.5)
    assert h.s == pytest.approx(0.5, abs=1e-3) and h.s < 1
    with pytest.raises(ValueError):
        holder_contact("x/2", 1.0)


def test_essential_norm_formula_examples():
    assert essential_norm_formula("1 - 2*abs(x - 1/2)").total == pytest.approx(1.0, abs=1e-6)
    assert essential_norm_formula("x").total == pytest.approx(1.0, abs=1e-6)
    f = essential_norm_formula("x^2")
    assert f.total == pytest.approx(0.5, abs=1e-6) and f.sqrt_total == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert not essential_norm_formula(BUMP).applicable
    assert not essential_norm_formula("x/2").applicable


def test_tent_essential_norm_against_spectra():
    tr = compop_tail_estimates("1 - 2*abs(x - 1/2)", GEOM, 12, range(2, 9))
    assert all(0.9 <= e <= 1.1 for e in tr.values)


# --------------------------------------------------------------------------- #
# Tail-mass bounds
# --------------------------------------------------------------------------- #


def test_upper_tail_mass_bound():
    h = holder_contact(CUSP, 0.5)
    mu = pullback(CUSP)
    deltas = np.geomspace(1e-6, 1e-2, 9)
    assert np.all(tail_mass(mu, deltas) <= 2 * 1 * h.c * deltas**h.s)


def test_lower_tail_mass_bound():
    eps = 1e-2
    ts = 0.5 - np.geomspace(1e-8, eps, 60)
    phi_vals = 1 - (ts - 0.5) ** 2
    eta = float(np.max((1.0 - phi_vals) / (0.5 - ts))) * (1 + 1e-9)
    deltas = np.geomspace(1e-9, 0.99 * eta * eps, 9)
    assert np.all(tail_mass(pullback(BUMP), deltas) >= deltas / eta)


# --------------------------------------------------------------------------- #
# Classification
# --------------------------------------------------------------------------- #


def _rules(rep, name):
    return " ".join(rep.verdicts[name].rules)


def test_classify_half_map():
    rep = classify_compop("x/2", GEOM, spectra=False)
    assert rep["schatten_all_q"] == "yes" and "rule 0" in _rules(rep, "schatten_all_q")
    assert rep["compact"] == "yes" and rep["bounded"] == "yes"


def test_classify_cusp():
    rep = classify_compop(CUSP, GEOM, spectra=False)
    assert rep["compact"] == "yes" and "rule ii" in _rules(rep, "compact")
    assert rep["schatten_all_q"] == "yes" and "rule iii" in _rules(rep, "schatten_all_q")


def test_classify_smooth_interior_maximum():
    rep = classify_compop(BUMP, GEOM, spectra=False)
    assert rep["compact"] == "no" and rep["bounded"] == "no"


def test_classify_tent_is_bounded_not_schatten_by_rule_iii():
    rep = classify_compop(TENT, GEOM, spectra=False)
    assert rep["bounded"] == "yes"
    assert rep["compact"] == "no"
    assert "rule iii" not in _rules(rep, "schatten_all_q")


def test_classify_interval_of_maximum():
    rep = classify_compop("min(2*x, 1)", GEOM, spectra=False)
    assert rep["bounded"] == "no" and "rule 0'" in _rules(rep, "bounded")


def test_classification_consistency_with_spectra():
    rep = classify_compop(CUSP, GEOM, spectra=False)
    assert rep["compact"] == "yes"
    tr = compop_tail_estimates(CUSP, GEOM, 12, range(0, 9))
    assert all(b <= a * (1 + 1e-9) for a, b in zip(tr.values, tr.values[1:]))
    assert tr.values[-1] < 0.5 * tr.values[0]
    rep = classify_compop(BUMP, GEOM, spectra=False)
    assert rep["bounded"] == "no"
    s1 = operator_norm_estimate(GEOM, pullback(BUMP), [4, 6, 8, 10, 12]).s1
    assert all(b > a for a, b in zip(s1, s1[1:]))


def test_weighted_classification_notes_the_weight():
    rep = classify_compop("x/2", GEOM, psi="x", spectra=False)
    assert rep["schatten_all_q"] == "yes" and rep.evidence["weight"]["sup_abs_on_grid"] == pytest.approx(1.0)
    json.dumps(rep.to_dict(), allow_nan=False)
