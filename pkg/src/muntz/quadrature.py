"""Globally adaptive Gauss-Legendre quadrature for vector-valued integrands.

The integrand receives a 1-D array of nodes and returns either an array of
the same length or an ``(m, len(nodes))`` array (``m`` integrands sharing
one mesh).  Each subinterval is integrated with 10- and 20-point rules;
their difference is the error estimate.  The interval with the worst
error-to-tolerance ratio is split first, so endpoint singularities such as
``y**-0.5`` get a mesh that is graded geometrically (ratio 1/2) toward the
singular point.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = ["QuadResult", "integrate", "default_abs_tol", "abs_tol_override", "MAX_DEPTH"]

MAX_DEPTH = 1000
# Children narrower than this many ulps of their location would put Gauss
# nodes on the interval ends.
_MIN_ULPS = 4096
MAX_INTERVALS = 20000
_BATCH = 64
_STALL = 30

_X10, _W10 = leggauss(10)
_X20, _W20 = leggauss(20)
_NODES = np.concatenate([_X10, _X20])


_OVERRIDE: ContextVar[float | None] = ContextVar("muntz_abs_tol", default=None)


@contextmanager
def abs_tol_override(value: float | None):
    """Temporarily replace the default absolute tolerance in this context."""
    if value is not None and not value > 0:
        raise ValueError("absolute tolerance must be positive")
    token = _OVERRIDE.set(value)
    try:
        yield
    finally:
        _OVERRIDE.reset(token)


def default_abs_tol() -> float:
    """Absolute tolerance: an active :func:`abs_tol_override`, then
    ``MUNTZ_QUAD_TOL``, then 1e-10."""
    if _OVERRIDE.get() is not None:
        return _OVERRIDE.get()
    raw = os.environ.get("MUNTZ_QUAD_TOL")
    if raw:
        value = float(raw)
        if not value > 0:
            raise ValueError("MUNTZ_QUAD_TOL must be positive")
        return value
    return 1e-10


@dataclass
class QuadResult:
    value: np.ndarray
    error: np.ndarray
    converged: bool
    intervals: int

    def scalar(self) -> tuple[float, float]:
        return float(self.value[0]), float(self.error[0])


def _apply(f: Callable, a: np.ndarray, b: np.ndarray):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(x.ravel()), dtype=float)
    if vals.ndim == 1:
        vals = vals[None, :]
    vals = vals.reshape(vals.shape[0], len(a), len(_NODES))
    i10 = (vals[:, :, :10] * _W10).sum(axis=2) * half
    i20 = (vals[:, :, 10:] * _W20).sum(axis=2) * half
    return i20, np.abs(i20 - i10)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    points: Iterable[float] = (),
    abs_tol: float | None = None,
    rel_tol: float = 1e-12,
    grade: int = 4,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` to ``err_i <= max(abs_tol, rel_tol*|I_i|)``.

    ``points`` are interior breakpoints (kinks, jumps, singularities); the
    initial mesh is graded toward each of them and toward ``a`` and ``b`` by
    ``grade`` halvings.
    """
    if abs_tol is None:
        abs_tol = default_abs_tol()
    if not b > a:
        raise ValueError("integration needs a < b")
    cuts = sorted({a, b, *(p for p in points if a < p < b)})
    lo, hi, depth = [], [], []
    for u, v in zip(cuts, cuts[1:]):
        # Geometric grading toward both ends of each segment.
        inner = [u + (v - u) * 0.5**k for k in range(grade, 0, -1)]
        inner += [v - (v - u) * 0.5**k for k in range(2, grade + 1)]
        nodes = sorted({u, v, *inner})
        for s, t in zip(nodes, nodes[1:]):
            if t > s:
                lo.append(s)
                hi.append(t)
                depth.append(0)
    lo_a = np.array(lo)
    hi_a = np.array(hi)
    dep = np.zeros(len(lo_a), dtype=int)
    val, err = _apply(f, lo_a, hi_a)
    converged = False
    best, stall = np.inf, 0
    while True:
        total = val.sum(axis=1)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        ratio = float(np.max(err.sum(axis=1) / tol))
        if ratio <= 1.0:
            converged = True
            break
        # Noisy integrands stop improving; give up after a long plateau.
        if ratio < 0.99 * best:
            best, stall = ratio, 0
        else:
            stall += 1
            if stall >= _STALL:
                break
        if len(lo_a) >= MAX_INTERVALS:
            break
        mid = 0.5 * (lo_a + hi_a)
        wide = (hi_a - lo_a) > _MIN_ULPS * np.spacing(np.maximum(np.abs(lo_a), np.abs(hi_a)))
        splittable = (dep < MAX_DEPTH) & wide & (lo_a < mid) & (mid < hi_a)
        # Stop once the unsplittable intervals alone exhaust the budget:
        # further refinement elsewhere cannot reach the tolerance.
        stuck = err[:, ~splittable].sum(axis=1)
        if np.any(stuck > tol) and np.all(err[:, splittable].sum(axis=1) <= 0.5 * tol):
            break
        # Share of the tolerance each interval is using, worst component.
        score = np.max(err / tol[:, None], axis=0)
        score[~splittable] = -1.0
        order = np.argsort(-score)[:_BATCH]
        # Split the worst intervals; skip ones that are already negligible.
        chosen = order[score[order] > 1.0 / (8 * len(lo_a))]
        if chosen.size == 0:
            break
        keep = np.ones(len(lo_a), dtype=bool)
        keep[chosen] = False
        s, t, m = lo_a[chosen], hi_a[chosen], mid[chosen]
        a_new = np.concatenate([s, m])
        b_new = np.concatenate([m, t])
        v_new, e_new = _apply(f, a_new, b_new)
        lo_a = np.concatenate([lo_a[keep], a_new])
        hi_a = np.concatenate([hi_a[keep], b_new])
        dep = np.concatenate([dep[keep], dep[chosen] + 1, dep[chosen] + 1])
        val = np.concatenate([val[:, keep], v_new], axis=1)
        err = np.concatenate([err[:, keep], e_new], axis=1)
    return QuadResult(val.sum(axis=1), err.sum(axis=1), converged, len(lo_a))
