"""Finite positive measures on [0, 1]: literal (density plus atoms) or the
pullback of Lebesgue measure under a piecewise-monotone map.

Pullback densities are never written in closed form.  A density value at
``y`` is the sum of ``1/|phi'(x)|`` over the preimages ``x`` of ``y`` on the
monotone pieces, and tail masses ``mu([1-eps, 1])`` are measured directly as
lengths of preimage intervals, which stays accurate where ``phi'`` vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import exprdsl
from .exprdsl import Expr
from .quadrature import integrate

__all__ = [
    "InvalidMeasureError",
    "PartitionError",
    "MonotonePartition",
    "MeasureSpec",
    "TailProfile",
    "PushforwardCheck",
    "as_expr",
    "lebesgue",
    "literal",
    "auto_partition",
    "pullback",
    "moment",
    "moments",
    "tail_mass",
    "pushforward_identity_check",
    "sublinearity_profile",
    "mu_at_one",
    "measure_from_json",
]

RANGE_SLACK = 1e-9
MAX_SIGN_CHANGES = 64
AUTO_SAMPLES = 4096
CONST_TOL = 1e-12


class InvalidMeasureError(ValueError):
    pass


class PartitionError(ValueError):
    pass


def as_expr(e: Expr | str) -> Expr:
    return exprdsl.parse(e) if isinstance(e, str) else e


def map_values(phi: Expr, x) -> np.ndarray:
    """Evaluate a self-map of [0, 1], clamping float excursions up to 1e-9."""
    y = exprdsl.evaluate_array(phi, x)
    if y.size and (y.min() < -RANGE_SLACK or y.max() > 1 + RANGE_SLACK):
        k = int(np.argmax((y < -RANGE_SLACK) | (y > 1 + RANGE_SLACK)))
        xs = np.asarray(x, dtype=float).ravel()
        raise InvalidMeasureError(
            f"{exprdsl.to_text(phi)} leaves [0,1]: value {y.ravel()[k]!r} at x={xs[k]!r}"
        )
    return np.clip(y, 0.0, 1.0)


# --------------------------------------------------------------------------- #
# Monotone partitions
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MonotonePartition:
    """Breakpoints ``0 = u_0 < ... < u_m = 1`` and one tag per piece.

    Tags are ``"increasing"``, ``"decreasing"`` or ``"constant"``; ``values``
    holds the constant for constant pieces (``None`` otherwise).
    """

    breakpoints: tuple[float, ...]
    tags: tuple[str, ...]
    values: tuple[float | None, ...] = ()

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        if len(bp) < 2 or bp[0] != 0.0 or bp[-1] != 1.0:
            raise PartitionError("breakpoints must run from 0 to 1")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise PartitionError("breakpoints must be strictly increasing")
        if len(self.tags) != len(bp) - 1:
            raise PartitionError("need one tag per piece")
        if any(t not in ("increasing", "decreasing", "constant") for t in self.tags):
            raise PartitionError(f"unknown piece tag in {self.tags}")
        if not self.values:
            object.__setattr__(self, "values", (None,) * len(self.tags))

    @property
    def pieces(self) -> list[tuple[float, float, str, float | None]]:
        return [
            (a, b, t, v)
            for a, b, t, v in zip(self.breakpoints, self.breakpoints[1:], self.tags, self.values)
        ]

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "tags": list(self.tags),
            "values": list(self.values),
        }


def _golden(f: Callable[[float], float], a: float, b: float, maximize: bool, iters: int = 120) -> float:
    sign = -1.0 if maximize else 1.0
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(a)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = sign * f(d)
    return 0.5 * (a + b)


def _boundary(pred: Callable[[float], bool], a: float, b: float) -> float:
    """Bisection for the switch point of ``pred`` (``pred(a) != pred(b)``)."""
    pa = pred(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        if pred(m) == pa:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _cell_signs(y: np.ndarray) -> np.ndarray:
    d = np.diff(y)
    scale = np.maximum(np.abs(y[:-1]), np.abs(y[1:]))
    sgn = np.sign(d).astype(int)
    # Constant where the step is below 1e-12 both absolutely and relative
    # to the values, so tiny but genuinely monotone stretches survive.
    sgn[np.abs(d) <= CONST_TOL * np.minimum(scale, 1.0)] = 0
    return sgn


def auto_partition(phi: Expr | str, samples: int = AUTO_SAMPLES) -> MonotonePartition:
    """Detect monotone and constant pieces of ``phi`` by dense sampling.

    Extrema are refined by golden-section search inside their bracketing
    cells and the ends of constant pieces by bisection.  Piecewise breakpoints
    of the expression are always kept as partition points.
    """
    phi = as_expr(phi)
    f = lambda t: float(map_values(phi, np.array([t]))[0])  # noqa: E731
    bps = exprdsl.breakpoints(phi)
    xs = np.unique(np.concatenate([np.linspace(0.0, 1.0, samples + 1), bps]))
    ys = map_values(phi, xs)
    sgn = _cell_signs(ys)
    # Collapse cells into runs of equal sign, remembering run boundaries.
    runs: list[list] = []  # [sign, first cell, last cell]
    for k, s in enumerate(sgn):
        if runs and runs[-1][0] == s:
            runs[-1][2] = k
        else:
            runs.append([s, k, k])
    changes = sum(1 for r1, r2 in zip(runs, runs[1:]) if r1[0] != 0 and r2[0] != 0)
    if changes > MAX_SIGN_CHANGES:
        raise PartitionError(
            f"{changes} monotonicity changes detected (limit {MAX_SIGN_CHANGES}); "
            "supply an explicit partition"
        )
    cuts: list[float] = []
    for r1, r2 in zip(runs, runs[1:]):
        k = r2[1]  # grid index where the new run starts
        s1, s2 = r1[0], r2[0]
        if s1 != 0 and s2 != 0:
            lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
            cand = _golden(f, lo, hi, maximize=s1 > 0)
            best = min(
                (cand, xs[k - 1], xs[k], xs[k + 1]),
                key=lambda t: (-f(t) if s1 > 0 else f(t), t != xs[k]),
            )
            cuts.append(float(best))
        elif s2 == 0:
            c = ys[k]
            a = xs[max(k - 1, 0)]
            cuts.append(_boundary(lambda t: f(t) == c, a, xs[k]) if k > 0 else xs[k])
        else:
            c = ys[k]
            b = xs[min(k + 1, len(xs) - 1)]
            cuts.append(_boundary(lambda t: f(t) == c, xs[k], b))
    cuts.extend(b for b in bps if 0 < b < 1)
    edges = sorted({0.0, 1.0, *(c for c in cuts if 0 < c < 1)})
    # Drop slivers produced by refinement landing next to a grid point.
    merged = [edges[0]]
    for e in edges[1:]:
        if e - merged[-1] > 1e-13:
            merged.append(e)
        elif e == 1.0:
            merged[-1] = 1.0
    if len(merged) < 2:
        merged = [0.0, 1.0]
    return _tag_pieces(phi, merged)


def _tag_pieces(phi: Expr, edges: Sequence[float], probe: int = 65) -> MonotonePartition:
    tags, values, keep = [], [], [edges[0]]
    for a, b in zip(edges, edges[1:]):
        t = np.linspace(a, b, probe)
        y = map_values(phi, t)
        spread = float(y.max() - y.min())
        if spread <= CONST_TOL:
            tag, val = "constant", float(np.median(y))
        elif y[-1] > y[0]:
            tag, val = "increasing", None
        else:
            tag, val = "decreasing", None
        if tags and tags[-1] == tag == "constant" and abs(values[-1] - val) <= CONST_TOL:
            keep[-1] = b
            continue
        tags.append(tag)
        values.append(val)
        keep.append(b)
    return MonotonePartition(tuple(keep), tuple(tags), tuple(values))


def validate_partition(phi: Expr, part: MonotonePartition, probe: int = 257) -> None:
    """Raise :class:`PartitionError` when a piece is not monotone as tagged."""
    for a, b, tag, val in part.pieces:
        y = map_values(phi, np.linspace(a, b, probe))
        d = np.diff(y)
        noise = 1e-12 * max(1.0, float(np.abs(y).max()))
        if tag == "increasing" and (d < -noise).any():
            raise PartitionError(f"phi is not increasing on [{a}, {b}]")
        if tag == "decreasing" and (d > noise).any():
            raise PartitionError(f"phi is not decreasing on [{a}, {b}]")
        if tag == "constant" and float(y.max() - y.min()) > CONST_TOL:
            raise PartitionError(f"phi is not constant on [{a}, {b}]")


# --------------------------------------------------------------------------- #
# Measures
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MeasureSpec:
    """``scale * (density dm + sum of atoms)`` on [0, 1].

    ``provenance`` is ``"literal"`` or ``"pullback"``; pullback measures carry
    the map and its monotone partition and derive the density from them.
    """

    density: Expr | None = None
    atoms: tuple[tuple[float, float], ...] = ()
    provenance: str = "literal"
    phi: Expr | None = None
    partition: MonotonePartition | None = None
    scale: float = 1.0
    label: str = ""
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        atoms = tuple((float(p), float(m)) for p, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for p, m in atoms:
            if not 0.0 <= p <= 1.0:
                raise InvalidMeasureError(f"atom position {p} outside [0,1]")
            if not m > 0:
                raise InvalidMeasureError(f"atom mass {m} must be positive")
        if len({p for p, _ in atoms}) != len(atoms):
            raise InvalidMeasureError("atom positions must be distinct")
        if not self.scale > 0:
            raise InvalidMeasureError("scale must be positive")
        if self.provenance not in ("literal", "pullback"):
            raise InvalidMeasureError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "pullback" and (self.phi is None or self.partition is None):
            raise InvalidMeasureError("pullback measures need phi and a partition")

    # -- pieces of the measure ------------------------------------------------

    @property
    def has_density(self) -> bool:
        return self.provenance == "pullback" or self.density is not None

    def scaled(self, c: float) -> "MeasureSpec":
        return replace(self, scale=self.scale * c)

    @property
    def quad_rel_tol(self) -> float:
        # Pullback densities carry finite-difference noise near 1e-11.
        return 1e-10 if self.provenance == "pullback" else 1e-12

    def density_breakpoints(self) -> list[float]:
        if self.provenance == "pullback":
            pts = set()
            for a, b, tag, _ in self.partition.pieces:
                if tag != "constant":
                    pts.update(float(v) for v in map_values(self.phi, np.array([a, b])))
            return sorted(pts)
        return exprdsl.breakpoints(self.density) if self.density is not None else []

    def density_values(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.provenance == "pullback":
            return self.scale * _pullback_density(self.phi, self.partition, y)
        if self.density is None:
            return np.zeros_like(y)
        h = exprdsl.evaluate_array(self.density, y)
        if h.size and h.min() < -1e-12:
            k = int(np.argmin(h))
            raise InvalidMeasureError(
                f"density {exprdsl.to_text(self.density)} is negative ({h.ravel()[k]:.3g}) "
                f"at x={y.ravel()[k]!r}"
            )
        return self.scale * np.maximum(h, 0.0)

    def scaled_atoms(self) -> list[tuple[float, float]]:
        return [(p, self.scale * m) for p, m in self.atoms]

    def total_mass(self) -> float:
        return moment(self, 0.0)[0]

    def describe(self) -> dict:
        out: dict = {"provenance": self.provenance, "scale": self.scale}
        if self.label:
            out["label"] = self.label
        if self.density is not None:
            out["density"] = exprdsl.to_text(self.density)
        if self.atoms:
            out["atoms"] = [list(a) for a in self.atoms]
        if self.phi is not None:
            out["phi"] = exprdsl.to_text(self.phi)
            out["partition"] = self.partition.to_dict()
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def literal(density: Expr | str | None = None, atoms: Iterable = (), scale: float = 1.0, label: str = "") -> MeasureSpec:
    d = as_expr(density) if density is not None else None
    mu = MeasureSpec(density=d, atoms=tuple(tuple(a) for a in atoms), scale=scale, label=label)
    if d is not None:
        # Reject densities that are visibly negative on a probe grid.
        mu.density_values(np.linspace(0.0, 1.0, 1025))
    return mu


def lebesgue(scale: float = 1.0) -> MeasureSpec:
    return literal("1", scale=scale, label="lebesgue")


PIECEWISE_NOTE = "phi restricted to piecewise-monotone expressions (general Borel maps are out of scope)"


def pullback(phi: Expr | str, partition: MonotonePartition | str | None = "auto") -> MeasureSpec:
    """Pullback of Lebesgue measure under ``phi``: ``mu(E) = m(phi^{-1}(E))``.

    Constant pieces become atoms at their value with mass equal to the piece
    length; monotone pieces contribute to an implicitly evaluated density.
    """
    phi = as_expr(phi)
    map_values(phi, np.linspace(0.0, 1.0, 4097))
    if partition is None or partition == "auto":
        part = auto_partition(phi)
    else:
        part = partition
        validate_partition(phi, part)
    atoms: dict[float, float] = {}
    for a, b, tag, val in part.pieces:
        if tag == "constant":
            key = min(max(float(val), 0.0), 1.0)
            # Snap values within the constant tolerance onto one atom.
            hit = next((p for p in atoms if abs(p - key) <= CONST_TOL), key)
            atoms[hit] = atoms.get(hit, 0.0) + (b - a)
    return MeasureSpec(
        atoms=tuple(sorted(atoms.items())),
        provenance="pullback",
        phi=phi,
        partition=part,
        label=f"pullback({exprdsl.to_text(phi)})",
        notes=(PIECEWISE_NOTE,),
    )


def _preimage(phi: Expr, a: float, b: float, increasing: bool, y: np.ndarray) -> np.ndarray:
    """For each target ``y``, the switch point of ``phi >= y`` on ``[a, b]``.

    Increasing pieces give ``inf{x : phi(x) >= y}``, decreasing pieces
    ``sup{x : phi(x) >= y}``.  Bisection runs until the bracket stops
    shrinking in floating point.
    """
    lo = np.full(y.shape, a, dtype=float)
    hi = np.full(y.shape, b, dtype=float)
    for _ in range(1100):
        mid = 0.5 * (lo + hi)
        active = (lo < mid) & (mid < hi)
        if not active.any():
            break
        above = map_values(phi, mid) >= y
        if increasing:
            hi = np.where(active & above, mid, hi)
            lo = np.where(active & ~above, mid, lo)
        else:
            lo = np.where(active & above, mid, lo)
            hi = np.where(active & ~above, mid, hi)
    return 0.5 * (lo + hi)


def _derivative(phi: Expr, x: np.ndarray, a: float, b: float) -> np.ndarray:
    """Five-point central difference; the step shrinks to 1% of the distance
    to the nearest piece end so kinks with infinite slope stay resolved."""
    h = np.minimum(1e-4, 0.01 * np.minimum(x - a, b - x))
    h = np.maximum(h, 1e-300)
    # Snap the step to the float grid around x: otherwise x +- h rounds and the
    # realised step differs from h by up to an ulp of x, which dominates near
    # infinite-slope points where h is only a few hundred ulps.
    h = np.maximum((x + h) - x, np.spacing(x))
    f = lambda t: map_values(phi, np.clip(t, a, b))  # noqa: E731
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _pullback_density(phi: Expr, part: MonotonePartition, y: np.ndarray) -> np.ndarray:
    flat = y.ravel()
    out = np.zeros_like(flat)
    for a, b, tag, _ in part.pieces:
        if tag == "constant":
            continue
        ya, yb = map_values(phi, np.array([a, b]))
        lo, hi = min(ya, yb), max(ya, yb)
        inside = (flat > lo) & (flat < hi)
        if not inside.any():
            continue
        x = _preimage(phi, a, b, tag == "increasing", flat[inside])
        d = np.abs(_derivative(phi, x, a, b))
        with np.errstate(divide="ignore"):
            out[inside] += np.where(d > 0, 1.0 / d, 0.0)
    return out.reshape(y.shape)


# --------------------------------------------------------------------------- #
# Integrals
# --------------------------------------------------------------------------- #


def moments(
    mu: MeasureSpec,
    s: Sequence[float] | np.ndarray,
    abs_tol: float | None = None,
    rel_tol: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """``int x^s dmu`` for every ``s`` in one quadrature pass; returns values and
    error estimates."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if (s < 0).any():
        raise ValueError("moment exponents must be nonnegative")
    vals = np.zeros_like(s)
    errs = np.zeros_like(s)
    if mu.has_density:
        res = integrate(
            lambda y: mu.density_values(y)[None, :] * y[None, :] ** s[:, None],
            0.0,
            1.0,
            points=mu.density_breakpoints(),
            abs_tol=abs_tol,
            rel_tol=mu.quad_rel_tol if rel_tol is None else rel_tol,
        )
        vals += res.value
        errs += res.error
    for p, m in mu.scaled_atoms():
        vals += m * np.power(p, s)
    return vals, errs


def moment(mu: MeasureSpec, s: float, abs_tol: float | None = None) -> tuple[float, float]:
    """``int x^s dmu`` and its quadrature error estimate."""
    v, e = moments(mu, [s], abs_tol=abs_tol)
    return float(v[0]), float(e[0])


def _pullback_tail(mu: MeasureSpec, eps: np.ndarray) -> np.ndarray:
    t = 1.0 - eps
    total = np.zeros_like(eps)
    for a, b, tag, val in mu.partition.pieces:
        if tag == "constant":
            continue
        x = _preimage(mu.phi, a, b, tag == "increasing", t)
        ya, yb = map_values(mu.phi, np.array([a, b]))
        if tag == "increasing":
            length = np.where(yb >= t, b - x, 0.0)
            length = np.where(ya >= t, b - a, length)
        else:
            length = np.where(ya >= t, x - a, 0.0)
            length = np.where(yb >= t, b - a, length)
        total += length
    return total


def tail_mass(mu: MeasureSpec, eps: float | Sequence[float]) -> float | np.ndarray:
    """``mu([1 - eps, 1])`` for one ``eps`` or an array of them."""
    scalar = np.ndim(eps) == 0
    e = np.atleast_1d(np.asarray(eps, dtype=float))
    if ((e <= 0) | (e > 1)).any():
        raise ValueError("eps must lie in (0, 1]")
    out = np.zeros_like(e)
    if mu.provenance == "pullback":
        out += mu.scale * _pullback_tail(mu, e)
    elif mu.density is not None:
        pts = mu.density_breakpoints()
        for k, ek in enumerate(e):
            res = integrate(
                mu.density_values, 1.0 - ek, 1.0, points=pts, rel_tol=mu.quad_rel_tol
            )
            out[k] = res.value[0]
    for p, m in mu.scaled_atoms():
        out += np.where(p >= 1.0 - e, m, 0.0)
    return float(out[0]) if scalar else out


def mu_at_one(mu: MeasureSpec) -> float:
    """Mass of the atom at 1 (a density puts no mass on a point)."""
    return math.fsum(m for p, m in mu.scaled_atoms() if p == 1.0)


# --------------------------------------------------------------------------- #
# Diagnostics
# --------------------------------------------------------------------------- #


@dataclass
class PushforwardCheck:
    lhs: np.ndarray
    rhs: np.ndarray
    diff: np.ndarray
    mc: np.ndarray | None = None

    def ok(self, rtol: float = 1e-6) -> bool:
        return bool(np.all(self.diff <= rtol * (1 + np.abs(self.lhs))))


def _as_funcs(g) -> list[Callable[[np.ndarray], np.ndarray]]:
    items = g if isinstance(g, (list, tuple)) else [g]
    out = []
    for item in items:
        if callable(item):
            out.append(item)
        else:
            e = as_expr(item)
            out.append(lambda y, e=e: exprdsl.evaluate_array(e, y))
    return out


def pushforward_identity_check(
    phi: Expr | str,
    g,
    n_mc: int = 0,
    mu: MeasureSpec | None = None,
    seed: int = 0,
) -> PushforwardCheck:
    """Compare ``int g(phi(x)) dx`` with ``int g d(phi* m)`` for one or many ``g``.

    ``g`` may be an expression, a vectorized callable, or a list of either.
    With ``n_mc > 0`` a Monte Carlo estimate of the left side is attached.
    """
    phi = as_expr(phi)
    if mu is None:
        mu = pullback(phi)
    funcs = _as_funcs(g)
    stack = lambda y: np.vstack([fn(y) for fn in funcs])  # noqa: E731
    lhs = integrate(
        lambda x: stack(map_values(phi, x)),
        0.0,
        1.0,
        points=mu.partition.breakpoints[1:-1],
        rel_tol=1e-12,
    ).value
    rhs = np.zeros(len(funcs))
    if mu.has_density:
        rhs += integrate(
            lambda y: mu.density_values(y)[None, :] * stack(y),
            0.0,
            1.0,
            points=mu.density_breakpoints(),
            rel_tol=mu.quad_rel_tol,
        ).value
    for p, m in mu.scaled_atoms():
        rhs += m * stack(np.array([p]))[:, 0]
    mc = None
    if n_mc > 0:
        rng = np.random.default_rng(seed)
        mc = stack(map_values(phi, rng.random(n_mc))).mean(axis=1)
    return PushforwardCheck(lhs, rhs, np.abs(lhs - rhs), mc)


@dataclass
class TailProfile:
    eps: np.ndarray
    mass: np.ndarray
    ratio: np.ndarray
    alpha: float
    C: float
    sup_ratio: float
    sublinear: bool
    vanishing: bool
    alpha_sublinear: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps.tolist(),
            "mass": self.mass.tolist(),
            "ratio": self.ratio.tolist(),
            "alpha": self.alpha,
            "C": self.C,
            "sup_ratio": self.sup_ratio,
            "sublinear": self.sublinear,
            "vanishing": self.vanishing,
            "alpha_sublinear": self.alpha_sublinear,
        }


def default_eps_grid(k_max: int = 24) -> np.ndarray:
    return 0.5 ** np.arange(1, k_max + 1)


def sublinearity_profile(mu: MeasureSpec, eps_grid: Sequence[float] | None = None) -> TailProfile:
    """Tail masses on a geometric grid with power-law fit and flags.

    The fit ``mu(J_eps) ~ C eps^alpha`` uses the smallest half of the grid.
    ``sublinear``: ratios on the fine half stay within 1.05 times the largest
    ratio of the coarse half.  ``vanishing``: the last quarter of ratios is
    nonincreasing and ends below a tenth of the first ratio.
    ``alpha_sublinear``: fitted alpha above 1.05.
    """
    eps = np.asarray(default_eps_grid() if eps_grid is None else eps_grid, dtype=float)
    eps = np.sort(eps)[::-1]
    if len(eps) < 8:
        raise ValueError("the eps grid needs at least 8 points")
    if eps.min() <= 0 or eps.max() > 1:
        raise ValueError("the eps grid must lie in (0, 1]")
    mass = np.asarray(tail_mass(mu, eps))
    mass = np.maximum.accumulate(mass[::-1])[::-1]  # enforce monotonicity against roundoff
    ratio = mass / eps
    half = len(eps) // 2
    fine = slice(len(eps) - half, None)
    pos = mass[fine] > 0
    if pos.sum() >= 2:
        slope, icpt = np.polyfit(np.log(eps[fine][pos]), np.log(mass[fine][pos]), 1)
        alpha, C = float(slope), float(math.exp(icpt))
    else:
        alpha, C = math.inf, 0.0
    coarse_max = float(ratio[: len(eps) - half].max())
    sublinear = bool(ratio[fine].max() <= 1.05 * coarse_max)
    q = ratio[-max(2, len(eps) // 4):]
    vanishing = bool(np.all(np.diff(q) <= 1e-12 * max(1.0, q.max())) and ratio[-1] < 0.1 * ratio[0])
    return TailProfile(
        eps, mass, ratio, alpha, C, float(ratio.max()), sublinear, vanishing, alpha > 1.05
    )


# --------------------------------------------------------------------------- #
# JSON
# --------------------------------------------------------------------------- #


def measure_from_json(obj: Mapping | str) -> MeasureSpec:
    """Build a measure from its JSON description.

    Accepted: ``"lebesgue"``, ``{"lebesgue": true}``,
    ``{"density": "<expr>", "atoms": [[p, m], ...], "scale": c}`` and
    ``{"phi": "<expr>", "partition": "auto" | {"breakpoints": [...], "tags": [...]}}``.
    """
    if isinstance(obj, str):
        if obj.strip().lower() == "lebesgue":
            return lebesgue()
        raise InvalidMeasureError(f"unknown measure shorthand {obj!r}")
    allowed = {"density", "atoms", "scale", "phi", "partition", "lebesgue", "label"}
    unknown = set(obj) - allowed
    if unknown:
        raise InvalidMeasureError(f"unknown measure fields {sorted(unknown)}")
    scale = float(obj.get("scale", 1.0))
    if obj.get("lebesgue"):
        return lebesgue(scale)
    if "phi" in obj:
        if "density" in obj or "atoms" in obj:
            raise InvalidMeasureError("a pullback measure cannot also list a density or atoms")
        part = obj.get("partition", "auto")
        if isinstance(part, Mapping):
            part = MonotonePartition(
                tuple(part["breakpoints"]), tuple(part["tags"]), tuple(part.get("values", ()))
            )
        mu = pullback(obj["phi"], part)
        return mu.scaled(scale) if scale != 1.0 else mu
    if "density" not in obj and "atoms" not in obj:
        raise InvalidMeasureError("measure needs a density, atoms, or phi")
    return literal(obj.get("density"), obj.get("atoms", ()), scale, obj.get("label", ""))
