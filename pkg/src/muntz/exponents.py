"""Finite truncations of exponent sequences and their structural diagnostics.

Every check here sees only a finite prefix, so verdicts about the infinite
sequence are either passed through from a declared tail model or flagged as
prefix-only.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "TailModel",
    "ExponentSequence",
    "UndefinedInputError",
    "MuntzSum",
    "GapResult",
    "LacunarityResult",
    "ClosureReport",
    "geometric",
    "parse_sequence",
    "muntz_partial_sum",
    "gap_condition",
    "lacunarity",
    "quasilacunary",
    "best_block_ratio",
    "block_ratio_decay",
    "closure_check",
]

log = logging.getLogger(__name__)

PREFIX_CAVEAT = "prefix-only: a finite truncation cannot certify asymptotic behaviour"


class UndefinedInputError(ValueError):
    pass


@dataclass(frozen=True)
class TailModel:
    """What the caller asserts about the exponents beyond the truncation.

    ``kind`` is ``"none"``, ``"geometric"`` (with ``ratio`` > 1) or
    ``"asserted"`` (user asserts that the sum of reciprocals converges).
    """

    kind: str = "none"
    ratio: float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "geometric", "asserted"):
            raise ValueError(f"unknown tail model {self.kind!r}")
        if self.kind == "geometric" and (self.ratio is None or not self.ratio > 1):
            raise ValueError("geometric tail needs ratio > 1")


@dataclass(frozen=True)
class ExponentSequence:
    values: tuple[float, ...]
    tail: TailModel = field(default_factory=TailModel)

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("exponent sequence must have at least one value")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ValueError("exponents must be finite and nonnegative")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("exponents must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def head(self, n: int) -> "ExponentSequence":
        if not 1 <= n <= len(self.values):
            raise ValueError(f"cannot take {n} terms of a sequence of length {len(self)}")
        return ExponentSequence(self.values[:n], self.tail)

    def contains(self, value: float, tol: float = 1e-9) -> bool:
        return any(abs(v - value) <= tol for v in self.values)

    def to_dict(self) -> dict:
        out = {"values": list(self.values), "tail": {"kind": self.tail.kind}}
        if self.tail.ratio is not None:
            out["tail"]["ratio"] = self.tail.ratio
        return out


def geometric(base: float, n: int, start: int = 1) -> ExponentSequence:
    """``base**k`` for ``k = start .. start+n-1`` with a geometric tail."""
    if base <= 1:
        raise ValueError("geometric base must exceed 1")
    return ExponentSequence(
        tuple(float(base) ** k for k in range(start, start + n)),
        TailModel("geometric", float(base)),
    )


def _kwargs(body: str, names: Sequence[str]) -> dict[str, str]:
    parts = [p.strip() for p in body.split(",") if p.strip()]
    out: dict[str, str] = {}
    for i, part in enumerate(parts):
        if "=" in part:
            key, val = part.split("=", 1)
            out[key.strip()] = val.strip()
        elif i < len(names):
            out[names[i]] = part
        else:
            raise ValueError(f"too many arguments in {body!r}")
    return out


def parse_sequence(text: str, tail: str | None = None) -> ExponentSequence:
    """Build a sequence from CLI shorthand or a JSON array.

    Accepted forms: ``geom:2,12`` / ``geom:base=2,n=12[,start=1]``,
    ``pow:p=2,n=50`` (``k**p``), ``range:n=10`` (``1..n``),
    ``list:1,2,4`` and JSON arrays ``[1, 2, 4]``.  ``tail`` may be
    ``"asserted"`` or ``"geometric:<ratio>"`` to override the tail model.
    """
    text = text.strip()
    if text.startswith("["):
        seq = ExponentSequence(tuple(json.loads(text)))
    elif ":" in text:
        kind, body = text.split(":", 1)
        kind = kind.strip().lower()
        if kind == "geom":
            kw = _kwargs(body, ("base", "n", "start"))
            seq = geometric(float(kw["base"]), int(kw["n"]), int(kw.get("start", 1)))
        elif kind == "pow":
            kw = _kwargs(body, ("p", "n"))
            p = float(kw["p"])
            seq = ExponentSequence(tuple(float(k) ** p for k in range(1, int(kw["n"]) + 1)))
        elif kind == "range":
            kw = _kwargs(body, ("n",))
            seq = ExponentSequence(tuple(float(k) for k in range(1, int(kw["n"]) + 1)))
        elif kind == "list":
            seq = ExponentSequence(tuple(float(v) for v in body.split(",") if v.strip()))
        else:
            raise ValueError(f"unknown sequence generator {kind!r}")
    else:
        raise ValueError(f"cannot parse exponent sequence {text!r}")
    if tail:
        if tail == "asserted":
            seq = ExponentSequence(seq.values, TailModel("asserted"))
        elif tail.startswith("geometric:"):
            seq = ExponentSequence(seq.values, TailModel("geometric", float(tail.split(":")[1])))
        elif tail == "none":
            seq = ExponentSequence(seq.values)
        else:
            raise ValueError(f"unknown tail model {tail!r}")
    return seq


# --------------------------------------------------------------------------- #
# Diagnostics
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MuntzSum:
    partial: float
    verdict: str  # "summable" or "inconclusive"
    basis: str  # "geometric-tail", "user-asserted" or "finite-prefix"
    tail_bound: float | None = None
    warnings: tuple[str, ...] = ()


def muntz_partial_sum(seq: ExponentSequence) -> MuntzSum:
    """Sum of reciprocals over the truncation, with a three-valued verdict."""
    warnings = []
    if seq.values[0] == 0:
        msg = "skipped exponent 0 in the reciprocal sum"
        log.warning(msg)
        warnings.append(msg)
    partial = math.fsum(1.0 / v for v in seq.values if v > 0)
    if seq.tail.kind == "geometric":
        last = seq.values[-1]
        bound = 1.0 / (last * (seq.tail.ratio - 1.0)) if last > 0 else math.inf
        return MuntzSum(partial, "summable", "geometric-tail", bound, tuple(warnings))
    if seq.tail.kind == "asserted":
        return MuntzSum(partial, "summable", "user-asserted", None, tuple(warnings))
    return MuntzSum(partial, "inconclusive", "finite-prefix", None, tuple(warnings))


@dataclass(frozen=True)
class GapResult:
    inf_gap: float
    holds_on_prefix: bool


def gap_condition(seq: ExponentSequence) -> GapResult:
    if len(seq) < 2:
        raise UndefinedInputError("gap condition needs at least two exponents")
    gap = min(b - a for a, b in zip(seq.values, seq.values[1:]))
    return GapResult(gap, gap > 0)


@dataclass(frozen=True)
class LacunarityResult:
    gamma: float
    lacunary_on_prefix: bool
    caveat: str = PREFIX_CAVEAT


def _positive(seq: ExponentSequence) -> list[float]:
    vals = list(seq.values)
    if any(v <= 0 for v in vals):
        raise UndefinedInputError("ratio tests need strictly positive exponents")
    if len(vals) < 2:
        raise UndefinedInputError("ratio tests need at least two exponents")
    return vals


def lacunarity(seq: ExponentSequence) -> LacunarityResult:
    """Smallest consecutive ratio; lacunary on the prefix iff it exceeds 1."""
    vals = _positive(seq)
    gamma = min(b / a for a, b in zip(vals, vals[1:]))
    return LacunarityResult(gamma, gamma > 1)


def _chain_exists(vals: Sequence[float], block: int, gamma: float) -> bool:
    n = len(vals)
    # The chain has to start within the first block to cover the prefix.
    for start in range(min(block, n)):
        i = start
        while True:
            target = gamma * vals[i]
            j = next((k for k in range(i + 1, min(i + block, n - 1) + 1) if vals[k] >= target), None)
            if j is None:
                # Running off the end of the prefix is not a failure.
                if i + block >= n:
                    return True
                break
            i = j
    return False


def best_block_ratio(seq: ExponentSequence, block: int) -> float:
    """Largest gamma for which a block chain with gaps <= ``block`` covers the
    prefix, searched over the observed endpoint ratios (1.0 if none > 1)."""
    vals = _positive(seq)
    if block < 1:
        raise ValueError("block bound must be >= 1")
    candidates = sorted(
        {vals[j] / vals[i] for i in range(len(vals)) for j in range(i + 1, min(i + block, len(vals) - 1) + 1)},
        reverse=True,
    )
    for gamma in candidates:
        if gamma > 1 and _chain_exists(vals, block, gamma):
            return gamma
    return 1.0


def block_ratio_decay(seq: ExponentSequence, block: int) -> float | None:
    """Slope of ``log(m_j - 1)`` against ``log j`` over the last half of the
    chain of full steps, where ``r_j = l_{j*block} / l_{(j-1)*block}`` and
    ``m_j`` is the minimum of ``r`` over a window of ``w`` links starting at
    ``j`` (``w = max(3, links // 6)``, full windows only).

    The window minimum tracks a liminf, so short periodic ratio patterns
    give a flat curve instead of a phase-dependent slope.

    A clearly negative slope means the block ratios are drifting to 1: any
    sequence of polynomial growth has excess ``~ p/j`` and slope near -1,
    a geometric one has slope 0.  ``None``
    when the chain has fewer than four links or some ratio is not above 1.
    """
    vals = _positive(seq)
    idx = list(range(0, len(vals), block))
    links = [(float(k), vals[j] / vals[i]) for k, (i, j) in enumerate(zip(idx, idx[1:]), start=1)]
    if len(links) < 4 or any(r <= 1 for _, r in links):
        return None
    w = max(3, len(links) // 6)
    ratios = [r for _, r in links]
    links = [(links[k][0], min(ratios[k : k + w])) for k in range(len(links) - w + 1)]
    tail = links[len(links) // 2 :]
    if len(tail) < 3:
        return None
    xs = [math.log(v) for v, _ in tail]
    ys = [math.log(r - 1) for _, r in tail]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        return None
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


RATIO_DECAY_SLOPE = -0.5


def quasilacunary(seq: ExponentSequence, block: int, min_gamma: float = 1.0) -> bool:
    """Block-ratio test on the prefix.

    True iff some chain of indices with gaps at most ``block`` covers the
    prefix with endpoint ratios above ``max(1, min_gamma)``, *and* the block
    ratios are not visibly drifting to 1 (see :func:`block_ratio_decay`;
    slope at or below -0.5 counts as drifting).  On a finite prefix any
    increasing sequence admits some ratio above 1, so the drift test is
    what separates ``l_k = k`` from genuinely quasilacunary sequences.
    """
    if best_block_ratio(seq, block) <= max(1.0, min_gamma):
        return False
    slope = block_ratio_decay(seq, block)
    return slope is None or slope > RATIO_DECAY_SLOPE


@dataclass(frozen=True)
class ClosureReport:
    eta: float
    closed_on_prefix: bool
    checked: int
    failures: tuple[tuple[float, int, float], ...]  # (lambda, m, lambda * eta**m)

    @property
    def first_failure(self):
        return self.failures[0] if self.failures else None


def closure_check(seq: ExponentSequence, eta: float, tol: float = 1e-9) -> ClosureReport:
    """Check ``lambda * eta**m`` membership for every product inside the prefix."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    lo, hi = seq.values[0], seq.values[-1]
    failures = []
    checked = 0
    for lam in seq.values:
        if lam == 0 or eta == 1:
            checked += 1
            continue
        m = 1
        while True:
            prod = lam * eta**m
            if prod > hi + tol or (eta < 1 and prod < lo - tol):
                if eta < 1 and prod < lo - tol:
                    # Below the smallest exponent: cannot belong to the sequence.
                    failures.append((lam, m, prod))
                break
            checked += 1
            if not seq.contains(prod, tol):
                failures.append((lam, m, prod))
            m += 1
    return ClosureReport(eta, not failures, checked, tuple(failures))


def as_sequence(values: Iterable[float] | ExponentSequence | str) -> ExponentSequence:
    if isinstance(values, ExponentSequence):
        return values
    if isinstance(values, str):
        return parse_sequence(values)
    return ExponentSequence(tuple(values))
