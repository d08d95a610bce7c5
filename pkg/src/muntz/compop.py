"""Composition operators ``g -> g o phi`` from a Müntz space into ``L^2``.

Singular values come from two routes that must agree: the *direct* Gram
matrix ``int psi^2 phi^{l_i + l_j} dx`` and the *pullback* route through the
moments of ``phi* m``.  Classification combines the maximum points of
``phi``, one-sided Dini derivatives and Hölder-type contact fits there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import exprdsl
from .embedding import (
    ClassificationReport,
    EssentialTrend,
    GramPair,
    Verdict,
    VERDICT_NAMES,
    _cauchy,
    _exponents,
    _scaling,
    _sub_spectrum,
    _trend,
    essential_norm_estimate,
    liminf_test,
    liminf_trend,
    operator_norm_estimate,
    pencil_spectrum,
    propagate,
    SingularSpectrum,
)
from .exponents import as_sequence, lacunarity
from .measure import (
    Expr,
    MeasureSpec,
    _boundary,
    _golden,
    as_expr,
    auto_partition,
    map_values,
    moments,
    pullback,
)
from .quadrature import integrate

__all__ = [
    "EssentialMaxReport",
    "DiniEstimate",
    "HolderContact",
    "EssentialNormFormula",
    "compop_gram",
    "compop_svals",
    "compop_tail_estimates",
    "ess_max_points",
    "dini",
    "holder_contact",
    "classify_compop",
    "essential_norm_formula",
]

MAX_TOL = 1e-9
INF_THRESHOLD = 1e6
INF_LEVELS = 8
ZERO_TOL = 1e-6
# Fitted exponents carry noise near 1e-5; demand a visible margin above 1.
CONTACT_MARGIN = 1.01


def _f(phi: Expr):
    return lambda t: float(map_values(phi, np.array([t]))[0])


# --------------------------------------------------------------------------- #
# Gram assembly and spectra
# --------------------------------------------------------------------------- #


def compop_gram(
    phi: Expr | str,
    seq,
    n: int | None,
    psi: Expr | str | None = None,
    normalization: str = "raw",
    n0: int = 0,
) -> tuple[np.ndarray, float]:
    """``A_ij = d_i d_j int_0^1 psi(x)^2 phi(x)^{l_i + l_j} dx`` and its error."""
    phi = as_expr(phi)
    psi = as_expr(psi) if psi is not None else None
    lam = _exponents(seq, n, n0)
    d = _scaling(lam, normalization)
    sums = lam[:, None] + lam[None, :]
    uniq, inv = np.unique(sums, return_inverse=True)
    part = auto_partition(phi)
    points = set(part.breakpoints[1:-1])
    if psi is not None:
        points.update(exprdsl.breakpoints(psi))

    def integrand(x):
        y = map_values(phi, x)
        w = exprdsl.evaluate_array(psi, x) ** 2 if psi is not None else 1.0
        return w * y[None, :] ** uniq[:, None]

    res = integrate(integrand, 0.0, 1.0, points=sorted(points), abs_tol=1e-300, rel_tol=1e-12)
    a = res.value[inv].reshape(sums.shape)
    return d[:, None] * a * d[None, :], float(np.max(res.error))


def _compop_pair(phi: Expr, seq, n, route, psi, normalization, n0, mu) -> GramPair:
    lam = _exponents(seq, n, n0)
    d = _scaling(lam, normalization)
    b = d[:, None] * _cauchy(lam) * d[None, :]
    if route == "direct":
        a, err = compop_gram(phi, seq, n, psi, normalization, n0)
    elif route == "pullback":
        if psi is not None:
            raise ValueError("the pullback route does not support a weight")
        mu = pullback(phi) if mu is None else mu
        sums = lam[:, None] + lam[None, :]
        uniq, inv = np.unique(sums, return_inverse=True)
        vals, errs = moments(mu, uniq, abs_tol=1e-300)
        a = d[:, None] * vals[inv].reshape(sums.shape) * d[None, :]
        err = float(np.max(errs))
    else:
        raise ValueError(f"unknown route {route!r}; use 'direct' or 'pullback'")
    return GramPair(a, b, normalization, lam, err)


def compop_svals(
    phi: Expr | str,
    seq,
    n: int | None,
    route: str = "direct",
    psi: Expr | str | None = None,
    normalization: str = "normalized",
    n0: int = 0,
    mu: MeasureSpec | None = None,
) -> SingularSpectrum:
    """Singular values of the composition operator on a finite section."""
    phi = as_expr(phi)
    psi = as_expr(psi) if psi is not None else None
    pair = _compop_pair(phi, seq, n, route, psi, normalization, n0, mu)
    n_eff = len(as_sequence(seq)) if n is None else n
    return pencil_spectrum(
        pair.A, pair.B, pair.exponents, n=n_eff, n0=n0, normalization=normalization,
        moment_error=pair.moment_error, label=f"{route}:{exprdsl.to_text(phi)}",
    )


def compop_tail_estimates(
    phi: Expr | str,
    seq,
    n: int,
    n0_list: Sequence[int],
    route: str = "direct",
    psi: Expr | str | None = None,
    normalization: str = "normalized",
) -> EssentialTrend:
    """``e(n0)``, the norm of the operator on ``span{x^{l_k} : n0 < k <= n}``.

    One Gram matrix of size ``n`` is assembled and sliced for every ``n0``.
    """
    n0_list = list(n0_list)
    if any(not 0 <= k < n for k in n0_list):
        raise ValueError("every n0 must satisfy 0 <= n0 < n")
    phi = as_expr(phi)
    psi = as_expr(psi) if psi is not None else None
    pair = _compop_pair(phi, seq, n, route, psi, normalization, 0, None)
    vals = [float(_sub_spectrum(pair, k, n).values[0]) for k in n0_list]
    return EssentialTrend(n, n0_list, vals, _trend(vals))


# --------------------------------------------------------------------------- #
# Maximum points
# --------------------------------------------------------------------------- #


@dataclass
class EssentialMaxReport:
    alpha: float
    points: list[float]
    intervals: list[tuple[float, float]]
    v_eps: float

    @property
    def finite(self) -> bool:
        return not self.intervals

    def all_points(self) -> list[float]:
        return self.points + [x for iv in self.intervals for x in iv]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "points": self.points,
            "intervals": [list(iv) for iv in self.intervals],
            "V_eps": self.v_eps,
        }


def ess_max_points(phi: Expr | str, grid_n: int = 4096) -> EssentialMaxReport:
    """Maximum value of ``phi`` and where it is attained.

    Grid local maxima are refined by golden-section search; refined maxima
    within 1e-9 of the best value are clustered into points, and runs of grid
    points sitting at the maximum become intervals (each one a pullback atom).
    """
    phi = as_expr(phi)
    f = _f(phi)
    xs = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid_n + 1), exprdsl.breakpoints(phi)]))
    ys = map_values(phi, xs)
    h = 1.0 / grid_n
    left = np.concatenate([[-np.inf], ys[:-1]])
    right = np.concatenate([ys[1:], [-np.inf]])
    cand = np.nonzero((ys >= left) & (ys >= right))[0]
    refined = []
    for k in cand:
        lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
        x = _golden(f, lo, hi, maximize=True)
        fx = f(x)
        if ys[k] >= fx:
            x, fx = float(xs[k]), float(ys[k])
        refined.append((x, fx))
    alpha = max(v for _, v in refined)
    top = sorted(x for x, v in refined if v >= alpha - MAX_TOL)
    # Runs of grid points at the maximum are intervals of maximum.
    at_max = ys >= alpha - MAX_TOL
    intervals: list[tuple[float, float]] = []
    k = 0
    while k < len(xs):
        if at_max[k]:
            j = k
            while j + 1 < len(xs) and at_max[j + 1]:
                j += 1
            if j > k:
                pred = lambda t: f(t) >= alpha - MAX_TOL  # noqa: E731
                a = _boundary(pred, xs[k - 1], xs[k]) if k > 0 else 0.0
                b = _boundary(pred, xs[j], xs[j + 1]) if j + 1 < len(xs) else 1.0
                intervals.append((float(a), float(b)))
            k = j + 1
        else:
            k += 1
    points: list[float] = []
    for x in top:
        if any(a - 2 * h <= x <= b + 2 * h for a, b in intervals):
            continue
        if points and x - points[-1] <= 2 * h:
            continue
        points.append(x)
    return EssentialMaxReport(float(alpha), points, intervals, 2 * h)


# --------------------------------------------------------------------------- #
# Dini derivatives and contact exponents
# --------------------------------------------------------------------------- #


def _fmt(v: float | None):
    if v is None:
        return None
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


@dataclass
class DiniEstimate:
    x0: float
    D_minus_inf: float | None
    D_minus_sup: float | None
    D_plus_inf: float | None
    D_plus_sup: float | None
    levels: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "D_minus_inf": _fmt(self.D_minus_inf),
            "D_minus_sup": _fmt(self.D_minus_sup),
            "D_plus_inf": _fmt(self.D_plus_inf),
            "D_plus_sup": _fmt(self.D_plus_sup),
        }


def _side(f, x0: float, sign: int) -> tuple[float | None, float | None, dict]:
    """Lower and upper limits of ``(f(x0) - f(t)) / (x0 - t)`` as ``t -> x0``
    from the side given by ``sign`` (-1 left, +1 right)."""
    f0 = f(x0)
    hs, qs = [], []
    for j in range(8, 41):
        h = 2.0**-j
        t = x0 + sign * h
        if not 0.0 <= t <= 1.0:
            continue
        q = (f0 - f(t)) / (x0 - t)
        noise = 8 * np.finfo(float).eps * (abs(f0) + 1) / h
        if noise <= 1e-3 * abs(q) or (q == 0 and noise <= 1e-3):
            hs.append(h)
            qs.append(q)
        elif hs:
            break  # finer levels only get noisier
    if len(qs) < 2:
        return None, None, {"h": hs, "q": qs}
    q = np.array(qs)
    info = {"h": hs, "q": qs}
    # Divergence: large and monotone over enough consecutive levels.
    tail = q[-INF_LEVELS:]
    if len(q) >= INF_LEVELS and abs(q[-1]) > INF_THRESHOLD:
        d = np.diff(tail)
        if np.all(d > 0) and q[-1] > 0:
            return math.inf, math.inf, info
        if np.all(d < 0) and q[-1] < 0:
            return -math.inf, -math.inf, info
    # Richardson extrapolation assuming q(h) = D + c h + ...
    r = 2 * q[1:] - q[:-1]
    tail_r = r[-INF_LEVELS:]
    lo, hi = float(tail_r.min()), float(tail_r.max())
    lo = 0.0 if abs(lo) <= ZERO_TOL else lo
    hi = 0.0 if abs(hi) <= ZERO_TOL else hi
    return lo, hi, info


def dini(phi: Expr | str, x0: float) -> DiniEstimate:
    """One-sided Dini derivatives of ``phi`` at ``x0`` from difference
    quotients on ``h = 2^-j``, ``j = 8..40``; sides leaving [0, 1] are None."""
    phi = as_expr(phi)
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("x0 must lie in [0, 1]")
    f = _f(phi)
    mi, ms, linfo = _side(f, x0, -1) if x0 > 0 else (None, None, {})
    pi, ps, rinfo = _side(f, x0, +1) if x0 < 1 else (None, None, {})
    return DiniEstimate(x0, mi, ms, pi, ps, {"left": linfo, "right": rinfo})


@dataclass
class HolderContact:
    x0: float
    c: float
    s: float
    eps: float
    residual: float
    holds: bool
    samples: int

    def to_dict(self) -> dict:
        return {
            "x0": self.x0,
            "c": self.c,
            "s": self.s,
            "eps": self.eps,
            "residual": self.residual,
            "holds": self.holds,
            "samples": self.samples,
        }


def holder_contact(phi: Expr | str, x0: float, eps: float = 1e-3) -> HolderContact:
    """Fit ``|x - x0| <= c |phi(x) - 1|^s`` on geometric samples within ``eps``."""
    phi = as_expr(phi)
    f = _f(phi)
    if abs(f(x0) - 1.0) > MAX_TOL:
        raise ValueError(f"phi({x0}) = {f(x0)!r} is not 1")
    offsets = eps * 0.5 ** np.arange(0, 31)
    xs = np.concatenate([x0 - offsets, x0 + offsets])
    xs = xs[(xs >= 0.0) & (xs <= 1.0)]
    gap = np.abs(1.0 - map_values(phi, xs))
    dist = np.abs(xs - x0)
    keep = gap > 1e-13
    if keep.sum() < 3:
        raise ValueError("too few samples with phi below 1 near x0 for a contact fit")
    lx, lg = np.log(dist[keep]), np.log(gap[keep])
    s, icpt = np.polyfit(lg, lx, 1)
    c = math.exp(icpt) * 1.05
    resid = float(np.max(dist[keep] - c * gap[keep] ** s))
    return HolderContact(float(x0), c, float(s), eps, resid, resid <= 0.0, int(keep.sum()))


# --------------------------------------------------------------------------- #
# Essential norm formula
# --------------------------------------------------------------------------- #


@dataclass
class EssentialNormFormula:
    applicable: bool
    points: list[float]
    L: list[float]
    total: float | None
    sqrt_total: float | None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "points": self.points,
            "L": self.L,
            "sum": self.total,
            "sqrt_sum": self.sqrt_total,
            **({"reason": self.reason} if self.reason else {}),
        }


def _one_sided(lo, hi) -> float | None:
    if lo is None or hi is None:
        return None
    if math.isinf(lo) and lo == hi:
        return lo
    if math.isinf(lo) or math.isinf(hi):
        return None
    if abs(hi - lo) <= 1e-4 * max(1.0, abs(hi)):
        return 0.5 * (lo + hi)
    return None


def essential_norm_formula(phi: Expr | str, em: EssentialMaxReport | None = None) -> EssentialNormFormula:
    """Per-point ``L(x_i)`` from one-sided derivatives at the points where
    ``phi = 1``, their sum, and the square root of the sum.

    Both numbers are reported because the sum and its square root are the
    two readings available for the essential norm at p = 2.
    """
    phi = as_expr(phi)
    em = ess_max_points(phi) if em is None else em
    if em.alpha < 1 - MAX_TOL or not em.finite:
        return EssentialNormFormula(False, em.points, [], None, None, "phi must reach 1 at finitely many points")
    Ls = []
    for x in em.points:
        d = dini(phi, x)
        left = _one_sided(d.D_minus_inf, d.D_minus_sup) if x > 0 else None
        right = _one_sided(d.D_plus_inf, d.D_plus_sup) if x < 1 else None
        if (x > 0 and (left is None or not left > 0)) or (x < 1 and (right is None or not right < 0)):
            return EssentialNormFormula(
                False, em.points, Ls, None, None,
                f"one-sided derivatives at {x:g} are not well defined with the required signs",
            )
        L = 0.0
        if x > 0:
            L += 1.0 / left
        if x < 1:
            L += 1.0 / abs(right)
        Ls.append(L)
    total = math.fsum(Ls)
    return EssentialNormFormula(True, em.points, Ls, total, math.sqrt(total))


# --------------------------------------------------------------------------- #
# Classification
# --------------------------------------------------------------------------- #


def _is_pos(v) -> bool:
    return v is not None and v > 0


def _is_neg(v) -> bool:
    return v is not None and v < 0


def classify_compop(
    phi: Expr | str,
    seq,
    psi: Expr | str | None = None,
    n: int | None = None,
    holder_eps: float = 1e-3,
    spectra: bool = True,
) -> ClassificationReport:
    """Boundedness, compactness and Schatten membership of the composition
    operator, from the maximum structure of ``phi``.

    Rules: (0) max < 1 gives every Schatten class; (0') phi = 1 on an
    interval puts an atom at 1, so the operator is unbounded; (i) positive
    left and negative right lower/upper derivatives at every maximum point
    give boundedness, (ii) infinite ones give compactness, (iii) contact
    exponent above 1 at every point gives every Schatten class.  Converse:
    a zero one-sided upper derivative rules out boundedness, a finite one
    rules out compactness; polynomial maps touching 1 are never compact and
    are unbounded when they touch 1 inside (0, 1).
    """
    phi = as_expr(phi)
    seq = as_sequence(seq)
    v = {k: Verdict() for k in VERDICT_NAMES}
    notes: list[str] = []
    evidence: dict = {"phi": exprdsl.to_text(phi)}
    if psi is not None:
        psi = as_expr(psi)
        grid = np.linspace(0.0, 1.0, 4097)
        sup = float(np.max(np.abs(exprdsl.evaluate_array(psi, grid))))
        evidence["weight"] = {"psi": exprdsl.to_text(psi), "sup_abs_on_grid": sup}
        notes.append("weight only rescales the operator norm by at most sup|psi|; rules run on phi")

    lac_ok = False
    if len(seq) >= 2 and seq.values[0] > 0:
        lac = lacunarity(seq)
        lac_ok = lac.lacunary_on_prefix
        evidence["lacunarity"] = {"gamma": lac.gamma, "lacunary": lac_ok, "caveat": lac.caveat}

    em = ess_max_points(phi)
    evidence["ess_max"] = em.to_dict()
    touches_one = em.alpha >= 1 - MAX_TOL

    if not touches_one:
        v["schatten_all_q"].set("yes", f"rule 0: ess sup phi = {em.alpha:.6g} < 1")
    elif em.intervals:
        v["bounded"].set("no", "rule 0': phi = 1 on an interval (pullback atom at 1)")

    dinis = {}
    if touches_one and em.finite and em.points:
        dinis = {x: dini(phi, x) for x in em.points}
        evidence["dini"] = [d.to_dict() for d in dinis.values()]
        if lac_ok:
            rule_i = all(
                (x == 0 or _is_pos(d.D_minus_inf)) and (x == 1 or _is_neg(d.D_plus_sup))
                for x, d in dinis.items()
            )
            rule_ii = all(
                (x == 0 or d.D_minus_inf == math.inf) and (x == 1 or d.D_plus_sup == -math.inf)
                for x, d in dinis.items()
            )
            if rule_i:
                v["bounded"].set("yes", "rule i: D_-^i > 0 and D_+^s < 0 at every maximum point")
            if rule_ii:
                v["compact"].set("yes", "rule ii: D_-^i = +inf and D_+^s = -inf at every maximum point")
            contacts = []
            for x in em.points:
                try:
                    contacts.append(holder_contact(phi, x, holder_eps))
                except ValueError as exc:
                    notes.append(f"contact fit at {x:g} failed: {exc}")
                    contacts = None
                    break
            if contacts:
                evidence["holder"] = [c.to_dict() for c in contacts]
                if all(c.s > CONTACT_MARGIN and c.holds for c in contacts):
                    v["schatten_all_q"].set(
                        "yes", "rule iii: contact exponent s > 1 at every maximum point"
                    )
        else:
            notes.append("sequence not lacunary on the prefix: direct rules i-iii skipped")

    # Converse rules hold for every point with phi = 1, no lacunarity needed.
    for x, d in dinis.items():
        if (x > 0 and d.D_minus_sup == 0.0) or (x < 1 and d.D_plus_inf == 0.0):
            v["bounded"].set("no", f"converse: zero one-sided upper derivative at {x:g}")
        if (x > 0 and d.D_minus_sup is not None and math.isfinite(d.D_minus_sup)) or (
            x < 1 and d.D_plus_inf is not None and math.isfinite(d.D_plus_inf)
        ):
            v["compact"].set("no", f"converse: finite one-sided derivative at {x:g}")

    if exprdsl.is_polynomial(phi) and touches_one:
        interior = [x for x in em.points if 0 < x < 1]
        if interior:
            v["bounded"].set("no", "polynomial: phi = 1 at an interior point")
        v["compact"].set("no", "polynomial: phi^{-1}(1) is non-empty")

    propagate(v)

    mu = None
    try:
        mu = pullback(phi)
    except ValueError as exc:
        notes.append(f"pullback unavailable: {exc}")
    if mu is not None:
        pairs = liminf_test(seq, mu)
        evidence["liminf"] = {"pairs": pairs, **liminf_trend(pairs)}
        if spectra:
            n_sec = min(len(seq), 12) if n is None else n
            try:
                sizes = list(range(2, n_sec + 1, 2)) or [n_sec]
                evidence["operator_norm"] = operator_norm_estimate(seq, mu, sizes).to_dict()
                n0s = list(range(0, max(1, n_sec - 3)))
                evidence["essential_norm"] = essential_norm_estimate(seq, mu, n_sec, n0s).to_dict()
            except (ValueError, np.linalg.LinAlgError) as exc:
                evidence["spectral_error"] = str(exc)
    if touches_one and em.finite:
        evidence["essential_norm_formula"] = essential_norm_formula(phi, em).to_dict()
    return ClassificationReport(v, evidence, notes)
