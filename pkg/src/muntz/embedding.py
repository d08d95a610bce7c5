"""Finite sections of the embedding of a Müntz space into ``L^2(mu)``.

On ``span{x^{l_1}, ..., x^{l_n}}`` the embedding has singular values ``s``
solving ``A v = s^2 B v``, where ``A`` is the Gram matrix of the monomials in
``L^2(mu)`` and ``B`` their Gram matrix in ``L^2(dx)``,
``B_ij = 1/(l_i + l_j + 1)``.  Spectra are evidence only; the yes/no verdicts
of :func:`classify_embedding` come from measure-side rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exponents import as_sequence, lacunarity, quasilacunary
from .linalg import solve_factored, solve_pencil
from .measure import (
    MeasureSpec,
    TailProfile,
    moments,
    mu_at_one,
    sublinearity_profile,
    tail_mass,
)

__all__ = [
    "NORMALIZATIONS",
    "GramPair",
    "SingularSpectrum",
    "NormTrend",
    "EssentialTrend",
    "Verdict",
    "ClassificationReport",
    "lebesgue_gram",
    "mu_gram",
    "gram_pair",
    "pencil_spectrum",
    "embedding_svals",
    "operator_norm_estimate",
    "essential_norm_estimate",
    "schatten_qnorm",
    "liminf_test",
    "liminf_trend",
    "classify_embedding",
]

NORMALIZATIONS = ("raw", "normalized", "riesz")


def _exponents(seq, n: int | None, n0: int = 0) -> np.ndarray:
    seq = as_sequence(seq)
    n = len(seq) if n is None else n
    if not 1 <= n <= len(seq):
        raise ValueError(f"section size {n} not in 1..{len(seq)}")
    if not 0 <= n0 < n:
        raise ValueError(f"tail offset {n0} must satisfy 0 <= n0 < n")
    return np.asarray(seq.values[n0:n], dtype=float)


def _scaling(lam: np.ndarray, normalization: str) -> np.ndarray:
    if normalization == "raw":
        return np.ones_like(lam)
    if normalization == "normalized":
        return np.sqrt(2 * lam + 1)
    if normalization == "riesz":
        if (lam <= 0).any():
            raise ValueError("Riesz scaling needs positive exponents")
        return np.sqrt(lam)
    raise ValueError(f"unknown normalization {normalization!r}; choose from {NORMALIZATIONS}")


def _cauchy(lam: np.ndarray) -> np.ndarray:
    return 1.0 / (lam[:, None] + lam[None, :] + 1.0)


def lebesgue_gram(seq, n: int | None = None, normalization: str = "raw") -> np.ndarray:
    """``B_ij = d_i d_j / (l_i + l_j + 1)`` with ``d`` the normalization scale."""
    lam = _exponents(seq, n)
    d = _scaling(lam, normalization)
    return d[:, None] * _cauchy(lam) * d[None, :]


def _moment_matrix(lam: np.ndarray, values_for) -> tuple[np.ndarray, float]:
    sums = lam[:, None] + lam[None, :]
    uniq, inv = np.unique(sums, return_inverse=True)
    vals, errs = values_for(uniq)
    return vals[inv].reshape(sums.shape), float(np.max(errs))


def mu_gram(
    seq,
    n: int | None,
    mu: MeasureSpec,
    normalization: str = "raw",
    n0: int = 0,
) -> tuple[np.ndarray, float]:
    """``A_ij = d_i d_j int x^{l_i + l_j} dmu`` and the largest quadrature error.

    Moments are computed to a relative tolerance (1e-12 for literal measures)
    so that tiny entries keep their leading digits.
    """
    lam = _exponents(seq, n, n0)
    d = _scaling(lam, normalization)
    a, err = _moment_matrix(lam, lambda s: moments(mu, s, abs_tol=1e-300))
    return d[:, None] * a * d[None, :], err


@dataclass
class GramPair:
    A: np.ndarray
    B: np.ndarray
    normalization: str
    exponents: np.ndarray
    moment_error: float = 0.0

    def check(self) -> list[str]:
        """Return violated invariants (empty when all hold)."""
        problems = []
        for name, m in (("A", self.A), ("B", self.B)):
            if not np.allclose(m, m.T, rtol=1e-12, atol=0):
                problems.append(f"{name} is not symmetric")
        wb = np.linalg.eigvalsh(self.B)
        if wb[0] <= 0:
            problems.append("B is not positive definite")
        wa = np.linalg.eigvalsh(self.A)
        if wa[0] < -1e-10 * max(np.trace(self.A), 0.0):
            problems.append("A is not positive semidefinite")
        return problems


def gram_pair(seq, n: int | None, mu: MeasureSpec, normalization: str = "normalized", n0: int = 0) -> GramPair:
    lam = _exponents(seq, n, n0)
    a, err = mu_gram(seq, n, mu, normalization, n0)
    d = _scaling(lam, normalization)
    b = d[:, None] * _cauchy(lam) * d[None, :]
    return GramPair(a, b, normalization, lam, err)


@dataclass
class SingularSpectrum:
    values: np.ndarray
    n: int
    n0: int = 0
    normalization: str = "normalized"
    condition: float = 1.0
    sweeps: int = 0
    off_norm: float = 0.0
    moment_error: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.values = np.sort(np.maximum(np.asarray(self.values, dtype=float), 0.0))[::-1]

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return {
            "values": self.values.tolist(),
            "n": self.n,
            "n0": self.n0,
            "normalization": self.normalization,
            "condition": self.condition,
            "jacobi_sweeps": self.sweeps,
            "off_norm": self.off_norm,
            "moment_error": self.moment_error,
            **({"label": self.label} if self.label else {}),
        }


def pencil_spectrum(a: np.ndarray, b: np.ndarray, lam: np.ndarray, **meta) -> SingularSpectrum:
    """Singular values of the pencil ``(A, B)``, factoring with exponents descending."""
    order = np.argsort(-lam, kind="stable")
    res = solve_pencil(a, b, order)
    return SingularSpectrum(
        res.singular_values,
        condition=res.condition_b,
        sweeps=res.sweeps,
        off_norm=res.off_norm,
        **meta,
    )


def embedding_svals(
    seq,
    n: int | None,
    mu: MeasureSpec,
    normalization: str = "normalized",
    n0: int = 0,
) -> SingularSpectrum:
    """Singular values of the embedding restricted to ``span{x^{l_k} : n0 < k <= n}``.

    Purely atomic measures use the exact factor ``A = F^T F`` with
    ``F_kj = sqrt(m_k) d_j p_k^{l_j}``, so the zero singular values beyond
    the number of atoms come out exactly zero.
    """
    n_eff = len(as_sequence(seq)) if n is None else n
    if not mu.has_density and mu.atoms:
        lam = _exponents(seq, n, n0)
        d = _scaling(lam, normalization)
        pts = np.array([p for p, _ in mu.scaled_atoms()])
        mass = np.array([m for _, m in mu.scaled_atoms()])
        with np.errstate(divide="ignore"):
            f = np.sqrt(mass)[:, None] * np.power(pts[:, None], lam[None, :]) * d[None, :]
        b = d[:, None] * _cauchy(lam) * d[None, :]
        order = np.argsort(-lam, kind="stable")
        res = solve_factored(f, b, order)
        return SingularSpectrum(
            res.singular_values, n=n_eff, n0=n0, normalization=normalization,
            condition=res.condition_b, label=mu.label,
        )
    pair = gram_pair(seq, n, mu, normalization, n0)
    return pencil_spectrum(
        pair.A,
        pair.B,
        pair.exponents,
        n=n_eff,
        n0=n0,
        normalization=normalization,
        moment_error=pair.moment_error,
        label=mu.label,
    )


# --------------------------------------------------------------------------- #
# Norm estimates
# --------------------------------------------------------------------------- #


@dataclass
class NormTrend:
    n_list: list[int]
    s1: list[float]
    final: float
    verdict: str  # "bounded evidence", "divergence evidence" or "inconclusive"

    def to_dict(self) -> dict:
        return {"n": self.n_list, "s1": self.s1, "final": self.final, "verdict": self.verdict}


def _norm_verdict(n_list: Sequence[int], s1: Sequence[float]) -> str:
    if len(s1) >= 2 and s1[-1] > 0 and abs(s1[-1] - s1[-2]) <= 1e-3 * s1[-1]:
        return "bounded evidence"
    if len(s1) >= 3 and s1[-1] > 1.5 * s1[0]:
        # Growth per unit of log n that does not slow down is faster than
        # any power of log n over the observed range.
        logs = np.log(np.asarray(n_list, dtype=float))
        slopes = np.diff(s1) / np.diff(logs)
        if np.all(slopes[-2:] > 0) and slopes[-1] >= slopes[-2]:
            return "divergence evidence"
    return "inconclusive"


def operator_norm_estimate(
    seq,
    mu: MeasureSpec,
    n_list: Iterable[int],
    normalization: str = "normalized",
) -> NormTrend:
    """Largest singular value ``s_1(n)`` for each section size in ``n_list``."""
    n_list = list(n_list)
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be nonempty and increasing")
    pair = gram_pair(seq, n_list[-1], mu, normalization)
    s1 = [float(_sub_spectrum(pair, 0, n).values[0]) for n in n_list]
    return NormTrend(n_list, s1, s1[-1], _norm_verdict(n_list, s1))


def _sub_spectrum(pair: GramPair, start: int, stop: int) -> SingularSpectrum:
    """Spectrum of the section spanned by exponents ``start..stop-1`` of ``pair``."""
    idx = slice(start, stop)
    return pencil_spectrum(
        pair.A[idx, idx],
        pair.B[idx, idx],
        pair.exponents[idx],
        n=stop,
        n0=start,
        normalization=pair.normalization,
        moment_error=pair.moment_error,
    )


@dataclass
class EssentialTrend:
    n: int
    n0_list: list[int]
    values: list[float]
    trend: str  # "decreasing", "flat" or "mixed"

    def to_dict(self) -> dict:
        return {"n": self.n, "n0": self.n0_list, "e": self.values, "trend": self.trend}


def _trend(values: Sequence[float]) -> str:
    v = np.asarray(values)
    if len(v) < 2:
        return "flat"
    d = np.diff(v)
    scale = max(float(np.abs(v).max()), 1e-300)
    if np.all(np.abs(d) <= 1e-6 * scale):
        return "flat"
    if np.all(d <= 1e-9 * scale):
        return "decreasing"
    if np.all(d >= -1e-9 * scale):
        return "increasing"
    return "mixed"


def essential_norm_estimate(
    seq,
    mu: MeasureSpec,
    n: int,
    n0_list: Iterable[int],
    normalization: str = "normalized",
) -> EssentialTrend:
    """``e(n0)``: the largest singular value on ``span{x^{l_k} : n0 < k <= n}``.

    The essential norm is suggested by the trend of ``e(n0)`` as ``n0``
    grows, never by a single value.
    """
    n0_list = list(n0_list)
    if any(not 0 <= n0 < n for n0 in n0_list):
        raise ValueError("every n0 must satisfy 0 <= n0 < n")
    pair = gram_pair(seq, n, mu, normalization)
    vals = [float(_sub_spectrum(pair, n0, n).values[0]) for n0 in n0_list]
    return EssentialTrend(n, n0_list, vals, _trend(vals))


def schatten_qnorm(spec: SingularSpectrum | Sequence[float], q: float) -> tuple[float, bool]:
    """Partial Schatten norm ``(sum s_k^q)^{1/q}`` and a convergence flag.

    Converged when the partial norms grow by less than ``1e-6`` of the total
    over the last quarter of the terms.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    s = np.asarray(spec.values if isinstance(spec, SingularSpectrum) else spec, dtype=float)
    s = np.sort(np.maximum(s, 0.0))[::-1]
    partial = np.cumsum(s**q) ** (1.0 / q)
    total = float(partial[-1])
    m = max(1, math.ceil(len(s) / 4))
    before = float(partial[-m - 1]) if len(s) > m else 0.0
    return total, bool(total - before < 1e-6 * total) if total > 0 else True


# --------------------------------------------------------------------------- #
# Converse tests and classification
# --------------------------------------------------------------------------- #


def liminf_test(seq, mu: MeasureSpec) -> list[tuple[float, float]]:
    """``(l_n, l_n * mu(J_{1/l_n}))`` for every ``l_n >= 1`` in the sequence."""
    lam = [v for v in as_sequence(seq).values if v >= 1]
    if not lam:
        return []
    mass = np.atleast_1d(tail_mass(mu, 1.0 / np.asarray(lam)))
    return [(float(l), float(l * m)) for l, m in zip(lam, mass)]


def liminf_trend(pairs: Sequence[tuple[float, float]]) -> dict:
    """Slope of ``log ratio`` against ``log lambda`` on the last half of the
    pairs, with the two flags used by the converse rules."""
    if len(pairs) < 4:
        return {"slope": None, "diverging": False, "to_zero": False, "not_to_zero": False}
    lam = np.array([p[0] for p in pairs])
    r = np.array([p[1] for p in pairs])
    tail = slice(len(r) // 2, None)
    if np.any(r[tail] <= 0):
        nz = r[tail] > 0
        return {"slope": None, "diverging": False, "to_zero": bool(r[-1] == 0) or not nz.any(), "not_to_zero": False}
    slope = float(np.polyfit(np.log(lam[tail]), np.log(r[tail]), 1)[0])
    increasing = bool(np.all(np.diff(r[tail]) > 0))
    return {
        "slope": slope,
        "diverging": slope >= 0.1 and increasing,
        "to_zero": slope <= -0.1,
        "not_to_zero": slope > -0.05,
    }


@dataclass
class Verdict:
    value: str = "inconclusive"  # "yes", "no" or "inconclusive"
    rules: list[str] = field(default_factory=list)

    def set(self, value: str, rule: str) -> None:
        if self.value == "inconclusive":
            self.value = value
            self.rules.append(rule)
        elif self.value == value:
            self.rules.append(rule)
        else:
            self.rules.append(f"conflict: {rule} says {value}")

    def to_dict(self) -> dict:
        return {"value": self.value, "rules": list(self.rules)}


VERDICT_NAMES = ("bounded", "compact", "schatten_all_q", "lambda2_embedding")


@dataclass
class ClassificationReport:
    verdicts: dict[str, Verdict]
    evidence: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __getitem__(self, key: str) -> str:
        return self.verdicts[key].value

    def inconclusive_only(self) -> bool:
        return all(v.value == "inconclusive" for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
            "evidence": self.evidence,
            "notes": self.notes,
        }


def propagate(verdicts: dict[str, Verdict]) -> None:
    """Apply Schatten => compact => bounded and the contrapositives."""
    chain = ["schatten_all_q", "compact", "bounded"]
    for hi, lo in zip(chain, chain[1:]):
        if verdicts[hi].value == "yes":
            verdicts[lo].set("yes", f"implied: {hi} yes")
    for lo, hi in zip(chain[::-1], chain[::-1][1:]):
        if verdicts[lo].value == "no":
            verdicts[hi].set("no", f"implied: {lo} no")
    if "lambda2_embedding" in verdicts:
        b = verdicts["bounded"]
        if b.value != "inconclusive":
            verdicts["lambda2_embedding"].set(b.value, "same as bounded (definition)")


def _support_gap(mu: MeasureSpec, profile: TailProfile) -> float | None:
    """Largest grid ``delta`` with ``mu(J_delta) = 0``, if any."""
    zero = profile.eps[profile.mass <= 0.0]
    if zero.size:
        return float(zero.max())
    return None


def classify_embedding(
    seq,
    mu: MeasureSpec,
    n: int | None = None,
    block_bound: int = 3,
    eps_grid: Sequence[float] | None = None,
    spectra: bool = True,
) -> ClassificationReport:
    """Verdicts for boundedness, compactness and Schatten membership.

    Rules in priority order: (1) an atom at 1 rules out an embedding;
    (2) support inside [0, 1-delta] gives every Schatten class;
    (3) sublinear + lacunary gives boundedness; (4) vanishing sublinear +
    lacunary gives compactness; (5) alpha-sublinear + quasilacunary gives
    every Schatten class; (6) diverging liminf ratios rule out boundedness;
    (7) liminf ratios not tending to 0 rule out compactness.
    """
    seq = as_sequence(seq)
    v = {k: Verdict() for k in VERDICT_NAMES}
    notes: list[str] = []
    evidence: dict = {"measure": mu.describe()}

    atom = mu_at_one(mu)
    evidence["mu_at_one"] = atom
    if atom > 0:
        v["lambda2_embedding"].set("no", "rule 1: mu({1}) > 0")
        v["bounded"].set("no", "rule 1: mu({1}) > 0")

    profile = sublinearity_profile(mu, eps_grid)
    evidence["tail_profile"] = profile.to_dict()
    gap = _support_gap(mu, profile)
    if gap is not None and atom == 0:
        v["schatten_all_q"].set("yes", f"rule 2: support in [0, 1-{gap:g}]")

    lac_ok, quasi_ok = False, False
    if len(seq) >= 2 and seq.values[0] > 0:
        lac = lacunarity(seq)
        lac_ok = lac.lacunary_on_prefix
        quasi_ok = quasilacunary(seq, block_bound)
        evidence["lacunarity"] = {"gamma": lac.gamma, "lacunary": lac_ok, "caveat": lac.caveat}
    if not lac_ok:
        notes.append("sequence not lacunary on the prefix: direct rules 3 and 4 skipped")

    if atom == 0:
        if profile.sublinear and lac_ok:
            v["bounded"].set("yes", "rule 3: sublinear measure, lacunary sequence")
        if profile.vanishing and lac_ok:
            v["compact"].set("yes", "rule 4: vanishing sublinear measure, lacunary sequence")
        if profile.alpha_sublinear and quasi_ok:
            v["schatten_all_q"].set(
                "yes", f"rule 5: alpha-sublinear (alpha={profile.alpha:.3g}), quasilacunary sequence"
            )

    pairs = liminf_test(seq, mu)
    trend = liminf_trend(pairs)
    evidence["liminf"] = {"pairs": pairs, **trend}
    if trend["diverging"]:
        v["bounded"].set("no", "rule 6: liminf ratios diverge")
    if trend["not_to_zero"]:
        v["compact"].set("no", "rule 7: liminf ratios do not tend to 0")
    propagate(v)

    if spectra and atom == 0:
        n_sec = min(len(seq), 12) if n is None else n
        try:
            sizes = list(range(2, n_sec + 1, 2)) or [n_sec]
            evidence["operator_norm"] = operator_norm_estimate(seq, mu, sizes).to_dict()
            n0s = list(range(0, max(1, n_sec - 3)))
            evidence["essential_norm"] = essential_norm_estimate(seq, mu, n_sec, n0s).to_dict()
        except (ValueError, np.linalg.LinAlgError) as exc:
            evidence["spectral_error"] = str(exc)
    notes.append("finite sections are evidence only; verdicts come from measure-side rules")
    return ClassificationReport(v, evidence, notes)
