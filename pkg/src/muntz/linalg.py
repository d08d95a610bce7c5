"""Symmetric eigensolver and the definite pencil ``A v = s^2 B v``.

The pencil is reduced with a Cholesky factor of ``B`` taken with the
exponents in *descending* order.  For Gram matrices of monomials this keeps
``L^{-1} A L^{-T}`` graded (large entries top-left get resolved first), and a
cyclic Jacobi sweep with a relative off-diagonal test then recovers even the
tiny eigenvalues to high relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "IllConditionedError",
    "JacobiResult",
    "jacobi_eigh",
    "PencilResult",
    "solve_pencil",
    "solve_factored",
    "MAX_N",
    "COND_LIMIT",
]

MAX_N = 64
COND_LIMIT = 1e14


class IllConditionedError(np.linalg.LinAlgError):
    pass


@dataclass
class JacobiResult:
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int
    off_norm: float


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> JacobiResult:
    """Cyclic Jacobi for a symmetric matrix.

    A pair ``(p, q)`` is rotated unless ``|a_pq| <= tol * sqrt(|a_pp a_qq|)``;
    the run ends after a sweep with no rotations.  The relative test is what
    gives small eigenvalues of graded matrices their relative accuracy.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > MAX_N:
        raise ValueError(f"section size {n} exceeds the limit {MAX_N}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=1e-300):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                app, aqq = a[p, p], a[q, q]
                if apq == 0.0 or abs(apq) <= tol * math.sqrt(abs(app * aqq)):
                    continue
                rotated = True
                diff = aqq - app
                if abs(apq) < 1e-150 * abs(diff):
                    # theta would overflow; t = 1/(2 theta) to full precision.
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    off = float(np.sqrt(np.sum(np.triu(a, 1) ** 2) * 2.0))
    return JacobiResult(np.diag(a).copy(), v, sweeps, off)


@dataclass
class PencilResult:
    """Eigenvalues ``s^2`` (descending) of the pencil and diagnostics."""

    eigenvalues: np.ndarray
    condition_b: float
    sweeps: int
    off_norm: float
    clamped: int

    @property
    def singular_values(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.eigenvalues, 0.0))


def _checked_cholesky(b: np.ndarray) -> tuple[np.ndarray, float]:
    w = np.linalg.eigvalsh(b)
    cond = float(w[-1] / w[0]) if w[0] > 0 else math.inf
    if not cond <= COND_LIMIT:
        raise IllConditionedError(
            f"Gram matrix of the monomials has condition number {cond:.3g} > {COND_LIMIT:g}; "
            "use normalized or Riesz scaling, or a smaller section"
        )
    try:
        return np.linalg.cholesky(b), cond
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"Gram matrix is not positive definite: {exc}") from None


def solve_factored(f: np.ndarray, b: np.ndarray, order: np.ndarray | None = None) -> PencilResult:
    """Pencil ``(F^T F, B)`` from the factor ``F`` (``m x n``) instead of ``A``.

    The singular values of ``F L^{-T}`` are taken directly, so values far
    below ``sqrt(eps)`` are not lost to squaring.  The pencil has rank at
    most ``m``; the remaining ``n - m`` eigenvalues are exactly zero.
    """
    f = np.atleast_2d(np.asarray(f, dtype=float))
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if b.shape != (n, n) or f.shape[1] != n:
        raise ValueError("F must have as many columns as B has rows")
    if n > MAX_N:
        raise ValueError(f"section size {n} exceeds the limit {MAX_N}")
    if order is not None:
        f = f[:, order]
        b = b[np.ix_(order, order)]
    low, cond = _checked_cholesky(b)
    g = solve_triangular(low, f.T, lower=True)
    s = np.linalg.svd(g, compute_uv=False)
    vals = np.zeros(n)
    vals[: len(s)] = np.sort(s)[::-1][:n] ** 2
    return PencilResult(vals, cond, 0, 0.0, 0)


def solve_pencil(a: np.ndarray, b: np.ndarray, order: np.ndarray | None = None) -> PencilResult:
    """Eigenvalues of ``A v = w B v`` with ``B`` positive definite.

    ``order`` permutes rows and columns before factoring ``B`` (pass the
    indices sorting the exponents in descending order).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n, n):
        raise ValueError("A and B must be square of the same size")
    if n > MAX_N:
        raise ValueError(f"section size {n} exceeds the limit {MAX_N}")
    if order is not None:
        a = a[np.ix_(order, order)]
        b = b[np.ix_(order, order)]
    low, cond = _checked_cholesky(b)
    y = solve_triangular(low, a, lower=True)
    c = solve_triangular(low, y.T, lower=True)
    res = jacobi_eigh(0.5 * (c + c.T))
    vals = np.sort(res.values)[::-1]
    clamped = int(np.sum(vals < 0))
    return PencilResult(vals, cond, res.sweeps, res.off_norm, clamped)
