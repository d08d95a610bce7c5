from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci

from muntz.exprdsl import evaluate_array, parse
from muntz.measure import (
    InvalidMeasureError,
    MonotonePartition,
    PartitionError,
    auto_partition,
    lebesgue,
    literal,
    measure_from_json,
    moment,
    moments,
    mu_at_one,
    pullback,
    pushforward_identity_check,
    sublinearity_profile,
    tail_mass,
    validate_partition,
)

MAPS = [
    "x^2",
    "1 - abs(2*x - 1)",
    "1 - sqrt(abs(x - 1/2))",
    "sqrt(x)",
    "x/2",
    "min(2*x, 1)",
    "4*x*(1 - x)",
    "x^3",
    "1 - (1 - x)^2",
    "max(x, 1/2)",
]


def _iterated_tent(k: int) -> str:
    text = "x"
    for _ in range(k):
        text = f"(1 - abs(2*{text} - 1))"
    return text


# -- moments ------------------------------------------------------------------


def test_moment_examples():
    assert moment(lebesgue(), 2)[0] == pytest.approx(1 / 3, abs=1e-14)
    assert moment(literal(None, [(0.5, 1.0)]), 2)[0] == 0.25
    assert moment(literal("x"), 1)[0] == pytest.approx(1 / 3, abs=1e-14)


def test_moments_keep_relative_accuracy_for_large_exponents():
    s = np.array([0.0, 1.0, 64.0, 4096.0, 2.0**16])
    vals, _ = moments(lebesgue(), s, abs_tol=1e-300)
    assert np.allclose(vals, 1 / (s + 1), rtol=1e-11, atol=0)


def test_negative_density_is_rejected():
    with pytest.raises(InvalidMeasureError):
        literal("x - 1/2")


def test_scaled_measure():
    mu = literal("1", [(0.25, 2.0)], scale=3.0)
    assert mu.total_mass() == pytest.approx(9.0, abs=1e-12)


# -- tail masses --------------------------------------------------------------


def test_tail_mass_examples():
    assert tail_mass(lebesgue(), 0.1) == pytest.approx(0.1, abs=1e-14)
    assert tail_mass(literal("1 - x"), 0.2) == pytest.approx(0.02, abs=1e-14)
    assert tail_mass(pullback("x^2"), 0.19) == pytest.approx(0.1, abs=1e-12)


@pytest.mark.parametrize("phi", MAPS)
def test_pullback_tail_mass_matches_monte_carlo(phi):
    rng = np.random.default_rng(12345)
    y = evaluate_array(parse(phi), rng.random(1_000_000))
    mu = pullback(phi)
    for eps in (0.5, 0.1, 0.01):
        mc = float(np.mean(y >= 1 - eps))
        sigma = math.sqrt(max(mc * (1 - mc), 1e-6) / 1e6)
        assert abs(float(tail_mass(mu, eps)) - mc) <= 6 * sigma + 1e-9, (phi, eps)


# -- pullback construction ----------------------------------------------------


def test_pullback_of_identity_is_lebesgue():
    mu = pullback("x")
    assert not mu.atoms
    assert mu.density_values(np.array([0.1, 0.5, 0.9])) == pytest.approx([1, 1, 1], abs=1e-8)


def test_pullback_density_of_square():
    mu = pullback("x^2")
    assert mu.density_values(np.array([0.25]))[0] == pytest.approx(1.0, rel=1e-7)
    # Limit of the density at 1 is 1/2.
    assert mu.density_values(np.array([1 - 1e-9]))[0] == pytest.approx(0.5, rel=1e-6)


def test_pullback_with_constant_piece_has_atom():
    mu = pullback("min(2*x, 1)")
    assert mu.atoms == ((1.0, 0.5),)
    assert mu.density_values(np.array([0.3, 0.7]))[0] == pytest.approx(0.5, rel=1e-8)
    assert mu_at_one(mu) == 0.5


def test_mu_at_one_examples():
    assert mu_at_one(lebesgue()) == 0
    assert mu_at_one(literal(None, [(1.0, 0.3)])) == 0.3


def test_auto_partition_finds_monotone_pieces():
    part = auto_partition("1 - abs(2*x - 1)")
    assert part.breakpoints == pytest.approx((0.0, 0.5, 1.0))
    assert part.tags == ("increasing", "decreasing")
    part = auto_partition("min(2*x, 1)")
    assert part.tags == ("increasing", "constant")


def test_too_many_pieces_require_explicit_partition():
    with pytest.raises(PartitionError):
        auto_partition(_iterated_tent(7))


def test_validate_partition_rejects_wrong_tags():
    bad = MonotonePartition((0.0, 1.0), ("decreasing",), (None,))
    with pytest.raises(PartitionError):
        validate_partition(parse("x^2"), bad)


# -- pushforward identity -----------------------------------------------------


def test_pushforward_examples():
    chk = pushforward_identity_check("x^2", "x")
    assert chk.lhs[0] == pytest.approx(1 / 3, abs=1e-12) and chk.ok()
    chk = pushforward_identity_check("min(2*x, 1)", "x^2")
    assert chk.lhs[0] == pytest.approx(2 / 3, abs=1e-12)
    assert chk.rhs[0] == pytest.approx(2 / 3, abs=1e-9)


@pytest.mark.parametrize("phi", MAPS)
def test_pushforward_against_scipy(phi):
    # lhs by scipy on the map, rhs by moments of the pullback measure.
    f = parse(phi)
    mu = pullback(phi)
    cuts = list(auto_partition(f).breakpoints)
    for g in ([1.0], [0.0, 0.0, 1.0], [2.0, 0.0, 0.0, 0.0, 3.0]):
        lhs = sum(
            sci.quad(
                lambda x: float(np.polyval(g[::-1], evaluate_array(f, np.array([x]))[0])),
                a, b, epsabs=1e-13, epsrel=1e-12, limit=200,
            )[0]
            for a, b in zip(cuts, cuts[1:])
        )
        vals, _ = moments(mu, np.arange(len(g), dtype=float))
        rhs = float(np.dot(g, vals))
        assert abs(lhs - rhs) <= 1e-6 * (1 + abs(lhs)), (phi, g)


def test_pushforward_monte_carlo_column():
    chk = pushforward_identity_check("1 - abs(2*x - 1)", ["x", "x^3"], n_mc=200_000, seed=1)
    assert chk.mc is not None
    assert np.allclose(chk.mc, chk.lhs, atol=5e-3)


# -- tail profiles ------------------------------------------------------------


def test_lebesgue_profile():
    prof = sublinearity_profile(lebesgue())
    assert np.allclose(prof.ratio, 1.0, atol=1e-9)
    assert prof.sublinear and not prof.vanishing
    assert prof.alpha == pytest.approx(1.0, abs=1e-9)


def test_linear_density_profile():
    prof = sublinearity_profile(literal("1 - x"))
    assert np.allclose(prof.ratio, prof.eps / 2, rtol=1e-9)
    assert prof.sublinear and prof.vanishing and prof.alpha_sublinear
    assert 1.9 <= prof.alpha <= 2.1


def test_atom_at_one_profile_diverges():
    prof = sublinearity_profile(literal(None, [(1.0, 1.0)]))
    assert not prof.sublinear
    assert prof.ratio[-1] > 1e6


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 4.0))
def test_power_density_tail_masses(p):
    # density (p+1)(1-x)^p has tail mass eps^(p+1) exactly.
    mu = literal(f"{p + 1!r}*(1 - x)^{p!r}")
    eps = np.array([0.5, 0.1, 0.01])
    assert np.allclose(tail_mass(mu, eps), eps ** (p + 1), rtol=1e-8)


# -- JSON ---------------------------------------------------------------------


def test_measure_from_json_forms():
    assert measure_from_json("lebesgue").total_mass() == pytest.approx(1.0)
    mu = measure_from_json({"density": "2*x", "atoms": [[0.5, 0.25]], "scale": 2})
    assert mu.total_mass() == pytest.approx(2.5, abs=1e-12)
    mu = measure_from_json({"phi": "x^2", "partition": {"breakpoints": [0, 1], "tags": ["increasing"]}})
    assert mu.provenance == "pullback"


@pytest.mark.parametrize(
    "bad",
    [{"density": "1", "colour": "red"}, {"phi": "x", "density": "1"}, {}, "counting", {"atoms": [[1.5, 1]]}],
)
def test_measure_from_json_errors(bad):
    with pytest.raises((InvalidMeasureError, ValueError)):
        measure_from_json(bad)


def test_pullback_moments_near_an_infinite_slope_maximum():
    # 1 - sqrt|x - 1/2| has pullback moments 4 int_0^{1/sqrt 2} (1 - v)^s v dv.
    import mpmath

    from muntz.measure import moments

    s = np.array([4.0, 64.0, 512.0, 2048.0])
    exact = np.array([float(4 * mpmath.quad(lambda v: (1 - v) ** t * v, [0, 1 / mpmath.sqrt(2)])) for t in s])
    got, _ = moments(pullback("1 - sqrt(abs(x - 1/2))"), s, abs_tol=1e-300)
    assert np.all(np.abs(got - exact) <= 1e-7 * exact)
