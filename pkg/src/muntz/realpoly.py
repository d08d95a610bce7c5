"""Exact algebra of real-exponent polynomials ``c_1 x^{s_1} + ... + c_l x^{s_l}``.

Exponents live in a Q-linear lattice spanned by named generators (``1``,
``sqrt2``, ...), whose values are *assumed* Q-linearly independent.  Two
terms merge only when their exponent vectors are exactly equal, never by
numeric proximity; coefficients are exact rationals.

Literal syntax::

    2*x^(3/2) - x^(s:sqrt2)
    (x + x^2)/2
    x^(1 + s:sqrt2) + 3

``s:name`` refers to a generator.  ``sqrtN``, ``pi`` and ``e`` have built-in
values; any other name must be declared through ``GeneratorSet``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

from .exponents import ExponentSequence

__all__ = [
    "GeneratorSet",
    "ExponentVector",
    "RealExpPolynomial",
    "PolyParseError",
    "SchinzelResult",
    "BasisReduction",
    "MembershipResult",
    "InvarianceReport",
    "BinomialSeries",
    "parse_poly",
    "poly_from_json",
    "monomial",
    "multiply",
    "power",
    "schinzel_check",
    "rational_basis_reduction",
    "membership_check",
    "invariance_test",
    "binomial_expand",
    "convergence_exponent",
    "clarkson_erdos_check",
]

_BUILTIN = {"pi": math.pi, "e": math.e}


def builtin_value(name: str) -> float:
    if name == "1":
        return 1.0
    if name in _BUILTIN:
        return _BUILTIN[name]
    m = re.fullmatch(r"sqrt(\d+)", name)
    if m:
        return math.sqrt(int(m.group(1)))
    raise KeyError(f"generator {name!r} has no built-in value; declare it")


@dataclass(frozen=True)
class GeneratorSet:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be unique")
        if any(not v > 0 for v in self.values):
            raise ValueError("generator values must be positive")

    @classmethod
    def of(cls, *names: str, **declared: float) -> "GeneratorSet":
        names = names or ("1",)
        vals = tuple(declared[n] if n in declared else builtin_value(n) for n in names)
        return cls(tuple(names), vals)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def __len__(self) -> int:
        return len(self.names)


UNIT = GeneratorSet(("1",), (1.0,))


@dataclass(frozen=True, order=True)
class ExponentVector:
    coords: tuple[Fraction, ...]

    def numeric(self, gens: GeneratorSet) -> float:
        return math.fsum(float(c) * v for c, v in zip(self.coords, gens.values))

    def __add__(self, other: "ExponentVector") -> "ExponentVector":
        return ExponentVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def scale(self, k) -> "ExponentVector":
        return ExponentVector(tuple(c * k for c in self.coords))

    def label(self, gens: GeneratorSet) -> str:
        parts = []
        for c, name in zip(self.coords, gens.names):
            if c == 0:
                continue
            if name == "1":
                parts.append(str(c))
            else:
                parts.append(f"s:{name}" if c == 1 else f"{c}*s:{name}")
        return " + ".join(parts) or "0"


def _zero(gens: GeneratorSet) -> ExponentVector:
    return ExponentVector(tuple(Fraction(0) for _ in gens.names))


class RealExpPolynomial:
    """Immutable sparse polynomial ``{exponent vector: rational coefficient}``."""

    __slots__ = ("gens", "_terms")

    def __init__(self, gens: GeneratorSet, terms: Mapping[ExponentVector, Fraction] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[ExponentVector, Fraction] = {}
        for exp, coeff in items:
            if len(exp.coords) != len(gens):
                raise ValueError("exponent vector does not match the generator set")
            merged[exp] = merged.get(exp, Fraction(0)) + Fraction(coeff)
        self.gens = gens
        self._terms = {e: c for e, c in merged.items() if c != 0}
        for e in self._terms:
            if e.numeric(gens) < -1e-12:
                raise ValueError("negative exponents are not supported")

    @property
    def terms(self) -> list[tuple[Fraction, ExponentVector]]:
        """Canonical order: numeric exponent ascending, ties by coordinates."""
        return [
            (self._terms[e], e)
            for e in sorted(self._terms, key=lambda e: (e.numeric(self.gens), e.coords))
        ]

    @property
    def term_count(self) -> int:
        return len(self._terms)

    def exponents(self) -> list[float]:
        return [e.numeric(self.gens) for _, e in self.terms]

    def coefficient(self, exp: ExponentVector) -> Fraction:
        return self._terms.get(exp, Fraction(0))

    def _check(self, other: "RealExpPolynomial"):
        if self.gens != other.gens:
            raise ValueError("polynomials use different generator sets")

    def __add__(self, other: "RealExpPolynomial") -> "RealExpPolynomial":
        self._check(other)
        return RealExpPolynomial(self.gens, list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> "RealExpPolynomial":
        return RealExpPolynomial(self.gens, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "RealExpPolynomial") -> "RealExpPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RealExpPolynomial):
            return multiply(self, other)
        k = Fraction(other)
        return RealExpPolynomial(self.gens, {e: c * k for e, c in self._terms.items()})

    __rmul__ = __mul__

    def __pow__(self, lam: int) -> "RealExpPolynomial":
        return power(self, lam)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RealExpPolynomial)
            and self.gens == other.gens
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.gens, frozenset(self._terms.items())))

    def __call__(self, x: float) -> float:
        return math.fsum(float(c) * x ** e.numeric(self.gens) for c, e in self.terms)

    def __repr__(self) -> str:
        return f"RealExpPolynomial({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for c, e in self.terms:
            lab = e.label(self.gens)
            if lab == "0":
                mono = ""
            elif lab == "1":
                mono = "x"
            elif re.fullmatch(r"\d+", lab):
                mono = f"x^{lab}"
            else:
                mono = f"x^({lab})"
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}" + (f"*{mono}" if mono else "")
            out.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(out)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def to_json(self) -> dict:
        return {
            "gens": dict(zip(self.gens.names, self.gens.values)),
            "terms": [
                [str(c), {n: str(v) for n, v in zip(self.gens.names, e.coords) if v != 0}]
                for c, e in self.terms
            ],
        }


def monomial(gens: GeneratorSet, coeff, **coords) -> RealExpPolynomial:
    """``coeff * x^(sum coords[name] * name)``; use ``one=`` for the unit generator."""
    vec = [Fraction(0)] * len(gens)
    for name, value in coords.items():
        vec[gens.index("1" if name == "one" else name)] = Fraction(value)
    return RealExpPolynomial(gens, {ExponentVector(tuple(vec)): Fraction(coeff)})


# --------------------------------------------------------------------------- #
# Literal parser
# --------------------------------------------------------------------------- #


class PolyParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_POLY_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<gen>s:[A-Za-z_0-9]+)|(?P<x>x)|(?P<op>[-+*/^()]))"
)


class _PolyParser:
    def __init__(self, text: str, gens: GeneratorSet | None):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _POLY_TOKEN.match(text, pos)
            if m is None:
                raise PolyParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0
        if gens is None:
            names = ["1"] + sorted({t[1][2:] for t in self.toks if t[0] == "gen"})
            gens = GeneratorSet.of(*names)
        self.gens = gens

    def peek(self) -> str:
        return self.toks[self.i][1]

    def take(self, text: str | None = None):
        tok = self.toks[self.i]
        if text is not None and tok[1] != text:
            raise PolyParseError(f"expected {text!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> RealExpPolynomial:
        p = self.expr()
        if self.toks[self.i][0] != "eof":
            tok = self.toks[self.i]
            raise PolyParseError(f"unexpected {tok[1]!r}", tok[2])
        return p

    def const(self, c) -> RealExpPolynomial:
        return RealExpPolynomial(self.gens, {_zero(self.gens): Fraction(c)})

    def expr(self) -> RealExpPolynomial:
        p = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> RealExpPolynomial:
        p = self.factor()
        while self.peek() in ("*", "/"):
            op, pos = self.take()[1], self.toks[self.i][2]
            q = self.factor()
            if op == "*":
                p = p * q
            else:
                const = q.coefficient(_zero(self.gens))
                if q.term_count != 1 or const == 0:
                    raise PolyParseError("can only divide by a nonzero constant", pos)
                p = p * (1 / const)
        return p

    def factor(self) -> RealExpPolynomial:
        if self.peek() == "-":
            self.take()
            return -self.factor()
        kind, text, pos = self.toks[self.i]
        if kind == "x":
            self.take()
            if self.peek() == "^":
                self.take()
                exp = self.exponent()
            else:
                exp = ExponentVector(tuple(Fraction(1) if n == "1" else Fraction(0) for n in self.gens.names))
            return RealExpPolynomial(self.gens, {exp: Fraction(1)})
        if kind == "num":
            self.take()
            base = self.const(Fraction(text))
        elif text == "(":
            self.take()
            base = self.expr()
            self.take(")")
        else:
            raise PolyParseError(f"unexpected {text or 'end of input'!r}", pos)
        if self.peek() == "^":
            _, _, ppos = self.take()
            k = self.rational()
            if k.denominator != 1 or k < 0:
                raise PolyParseError("only x takes non-integer powers", ppos)
            base = power(base, int(k)) if k > 0 else self.const(1)
        return base

    def rational(self) -> Fraction:
        kind, text, pos = self.toks[self.i]
        if text == "(":
            self.take()
            v = self.rational_expr()
            self.take(")")
            return v
        if kind != "num":
            raise PolyParseError("expected a number", pos)
        self.take()
        return Fraction(text)

    def rational_expr(self) -> Fraction:
        sign = 1
        if self.peek() == "-":
            self.take()
            sign = -1
        v = self.rational()
        while self.peek() in ("*", "/"):
            op = self.take()[1]
            w = self.rational()
            v = v * w if op == "*" else v / w
        return sign * v

    def exponent(self) -> ExponentVector:
        # Either a plain number or a parenthesized Q-linear combination.
        kind, text, pos = self.toks[self.i]
        if kind == "num":
            self.take()
            return self._vec({"1": Fraction(text)})
        if text != "(":
            raise PolyParseError("exponent must be a number or parenthesized", pos)
        self.take("(")
        coords: dict[str, Fraction] = {}
        sign = Fraction(1)
        if self.peek() == "-":
            self.take()
            sign = Fraction(-1)
        while True:
            name, coeff = self.exp_term()
            coords[name] = coords.get(name, Fraction(0)) + sign * coeff
            if self.peek() in ("+", "-"):
                sign = Fraction(1 if self.take()[1] == "+" else -1)
                continue
            break
        self.take(")")
        vec = self._vec(coords)
        if vec.numeric(self.gens) < 0:
            raise PolyParseError("negative exponents are not supported", pos)
        return vec

    def exp_term(self) -> tuple[str, Fraction]:
        coeff = Fraction(1)
        name = "1"
        kind, text, pos = self.toks[self.i]
        if kind == "num":
            self.take()
            coeff = Fraction(text)
            while self.peek() in ("/", "*"):
                op = self.take()[1]
                kind2, text2, pos2 = self.toks[self.i]
                if kind2 == "num":
                    self.take()
                    coeff = coeff / Fraction(text2) if op == "/" else coeff * Fraction(text2)
                elif kind2 == "gen" and op == "*":
                    self.take()
                    name = text2[2:]
                else:
                    raise PolyParseError("malformed exponent term", pos2)
            return name, coeff
        if kind == "gen":
            self.take()
            name = text[2:]
            while self.peek() in ("/", "*"):
                op = self.take()[1]
                kind2, text2, pos2 = self.toks[self.i]
                if kind2 != "num":
                    raise PolyParseError("malformed exponent term", pos2)
                self.take()
                coeff = coeff / Fraction(text2) if op == "/" else coeff * Fraction(text2)
            return name, coeff
        raise PolyParseError(f"unexpected {text or 'end of input'!r} in exponent", pos)

    def _vec(self, coords: Mapping[str, Fraction]) -> ExponentVector:
        vec = [Fraction(0)] * len(self.gens)
        for name, c in coords.items():
            try:
                vec[self.gens.index(name)] += c
            except KeyError:
                raise PolyParseError(f"unknown generator {name!r}", self.toks[self.i][2]) from None
        return ExponentVector(tuple(vec))


def parse_poly(text: str, gens: GeneratorSet | None = None) -> RealExpPolynomial:
    """Parse the literal syntax described in the module docstring."""
    if not text.strip():
        raise PolyParseError("empty polynomial", 0)
    return _PolyParser(text, gens).parse()


def poly_from_json(obj: Mapping) -> RealExpPolynomial:
    """``{"gens": {"1": 1, "sqrt2": 1.414...}, "terms": [[coeff, {gen: coord}], ...]}``.

    Coefficients and coordinates may be numbers or rational strings; an
    exponent may also be given as a string in the literal exponent syntax.
    """
    declared = obj.get("gens") or {"1": 1.0}
    names = list(declared)
    if "1" not in names:
        names.insert(0, "1")
    gens = GeneratorSet(tuple(names), tuple(float(declared.get(n, 1.0)) for n in names))
    terms = []
    for coeff, exp in obj["terms"]:
        if isinstance(exp, str):
            exp_vec = _PolyParser(f"x^({exp})", gens).parse().terms[0][1]
        elif isinstance(exp, Mapping):
            vec = [Fraction(0)] * len(gens)
            for name, v in exp.items():
                vec[gens.index(name)] = Fraction(str(v))
            exp_vec = ExponentVector(tuple(vec))
        else:
            vec = [Fraction(0)] * len(gens)
            vec[0] = Fraction(str(exp))
            exp_vec = ExponentVector(tuple(vec))
        terms.append((exp_vec, Fraction(str(coeff))))
    return RealExpPolynomial(gens, terms)


# --------------------------------------------------------------------------- #
# Ring operations
# --------------------------------------------------------------------------- #


def multiply(p: RealExpPolynomial, q: RealExpPolynomial) -> RealExpPolynomial:
    """Distribute and merge exactly equal exponent vectors."""
    p._check(q)
    out: dict[ExponentVector, Fraction] = {}
    for e1, c1 in p._terms.items():
        for e2, c2 in q._terms.items():
            e = e1 + e2
            out[e] = out.get(e, Fraction(0)) + c1 * c2
    return RealExpPolynomial(p.gens, out)


def power(p: RealExpPolynomial, lam: int) -> RealExpPolynomial:
    """``p**lam`` by repeated squaring."""
    if int(lam) != lam or lam < 1:
        raise ValueError("power needs a positive integer exponent")
    lam = int(lam)
    result = None
    base = p
    while lam:
        if lam & 1:
            result = base if result is None else multiply(result, base)
        lam >>= 1
        if lam:
            base = multiply(base, base)
    return result


@dataclass(frozen=True)
class SchinzelResult:
    count: int
    bound: int
    holds: bool


def schinzel_check(p: RealExpPolynomial, lam: int) -> SchinzelResult:
    """Count terms of ``p**lam`` against the lower bound ``lam + 1``."""
    if p.term_count < 2:
        raise ValueError("term-count bound needs a polynomial with at least two terms")
    count = power(p, lam).term_count
    return SchinzelResult(count, lam + 1, count >= lam + 1)


@dataclass(frozen=True)
class BasisReduction:
    """Integer coordinates after rescaling generators.

    ``scale[j]`` is the factor applied to generator ``j`` (``r_j -> scale_j r_j``);
    ``matrix[i][j]`` are the integer coordinates in the rescaled basis;
    ``b`` is the integer shift in the rescaled basis and ``shift`` the same
    shift expressed in the original generator coordinates.
    """

    matrix: tuple[tuple[int, ...], ...]
    scale: tuple[Fraction, ...]
    b: tuple[int, ...]
    shift: ExponentVector
    shifted: tuple[tuple[int, ...], ...]


def rational_basis_reduction(exponents: Sequence[ExponentVector]) -> BasisReduction:
    if not exponents:
        raise ValueError("need at least one exponent vector")
    tau = len(exponents[0].coords)
    scale = []
    for j in range(tau):
        lcm = reduce(math.lcm, (e.coords[j].denominator for e in exponents), 1)
        scale.append(Fraction(1, lcm))
    matrix = tuple(
        tuple(int(e.coords[j] / scale[j]) for j in range(tau)) for e in exponents
    )
    b = tuple(max(abs(row[j]) for row in matrix) + 1 for j in range(tau))
    shift = ExponentVector(tuple(b[j] * scale[j] for j in range(tau)))
    shifted = tuple(tuple(row[j] + b[j] for j in range(tau)) for row in matrix)
    return BasisReduction(matrix, tuple(scale), b, shift, shifted)


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    witnesses: tuple[float, ...]


def membership_check(p: RealExpPolynomial, seq: ExponentSequence, tol: float = 1e-9) -> MembershipResult:
    """Every numeric exponent of ``p`` must match a member of ``seq`` within ``tol``."""
    missing = tuple(s for s in p.exponents() if not seq.contains(s, tol))
    return MembershipResult(not missing, missing)


@dataclass
class InvarianceEntry:
    lam: float
    status: str  # "invariant", "violated" or "inconclusive"
    term_count: int
    first_violation: float | None = None
    beyond_prefix: tuple[float, ...] = ()


@dataclass
class InvarianceReport:
    entries: list[InvarianceEntry]
    skipped: list[float]
    invariant_on_prefix: bool
    structural_verdict: str
    notes: list[str]

    def to_dict(self) -> dict:
        return {
            "entries": [e.__dict__ | {"beyond_prefix": list(e.beyond_prefix)} for e in self.entries],
            "skipped": self.skipped,
            "invariant_on_prefix": self.invariant_on_prefix,
            "structural_verdict": self.structural_verdict,
            "notes": self.notes,
        }


def invariance_test(
    phi: RealExpPolynomial,
    seq: ExponentSequence,
    lam_values: Iterable[float],
    tol: float = 1e-9,
) -> InvarianceReport:
    """Expand ``phi**lam`` for integer ``lam`` in the sequence and check that
    every exponent stays in the sequence.

    Exponents above the last member of the truncation cannot be decided and
    make that entry inconclusive rather than violated.
    """
    if phi.term_count == 0 or (phi.term_count == 1 and phi.exponents()[0] == 0):
        raise ValueError("phi must be nonconstant")
    top = seq.values[-1]
    entries, skipped = [], []
    for lam in lam_values:
        lam = float(lam)
        if lam != int(lam) or lam < 1 or not seq.contains(lam, tol):
            skipped.append(lam)
            continue
        expanded = power(phi, int(lam))
        exps = expanded.exponents()
        beyond = tuple(s for s in exps if s > top + tol)
        bad = [s for s in exps if s <= top + tol and not seq.contains(s, tol)]
        if bad:
            status = "violated"
        elif beyond:
            status = "inconclusive"
        else:
            status = "invariant"
        entries.append(InvarianceEntry(lam, status, expanded.term_count, bad[0] if bad else None, beyond))

    notes = ["generator values are assumed linearly independent over the rationals"]
    integral = all(v == int(v) for v in seq.values)
    if phi.term_count >= 2 and integral:
        structural = "not invariant"
        notes.append(
            "for integer exponents with summable reciprocals, phi**lam has at least lam+1 "
            "terms, so no such infinite sequence can absorb them all"
        )
    elif phi.term_count == 2:
        structural = "not invariant"
        notes.append(
            "binomial phi: holds for any exponent sequence with summable reciprocals "
            "and the gap condition (binomial series argument)"
        )
    elif phi.term_count == 1:
        structural = "closure"
        notes.append("single-term phi = a*x^eta is invariant iff the sequence is closed under eta")
    else:
        structural = "inconclusive"
        notes.append("general phi over non-integer exponents is not covered")
    return InvarianceReport(
        entries,
        skipped,
        bool(entries) and all(e.status == "invariant" for e in entries),
        structural,
        notes,
    )


# --------------------------------------------------------------------------- #
# Series machinery
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class BinomialSeries:
    """``alpha**lam * sum_k a_k x^{lam*zeta1 + k*(zeta2 - zeta1)}``."""

    alpha: float
    beta: float
    zeta1: float
    zeta2: float
    lam: float
    coeffs: tuple
    exponents: tuple
    radius: float

    def prefactor(self) -> float:
        return abs(float(self.alpha)) ** float(self.lam) * (1 if self.alpha > 0 else math.nan)

    def partial_sum(self, x: float) -> float:
        s = math.fsum(float(a) * x ** float(e) for a, e in zip(self.coeffs, self.exponents))
        return float(self.alpha) ** float(self.lam) * s

    def remainder_bound(self, x: float) -> float:
        """Bound on the truncation error at ``x`` (inf when it cannot be bounded)."""
        K = len(self.coeffs) - 1
        lam = float(self.lam)
        r = abs(float(self.beta) / float(self.alpha)) * x ** (float(self.zeta2) - float(self.zeta1))
        if K + 1 < lam or r >= 1:
            return math.inf
        # |a_{k+1}/a_k| = r * |lam - k|/(k+1) <= r for k >= lam.
        a_next = abs(float(self.coeffs[-1])) * abs(float(self.beta) / float(self.alpha)) * abs(lam - K) / (K + 1)
        t_next = a_next * x ** (lam * float(self.zeta1) + (K + 1) * (float(self.zeta2) - float(self.zeta1)))
        return abs(float(self.alpha)) ** lam * t_next / (1 - r)


def binomial_expand(alpha, zeta1, beta, zeta2, lam, K: int) -> BinomialSeries:
    """Coefficients of the binomial series of ``(alpha x^zeta1 + beta x^zeta2)**lam``.

    ``a_k = (beta/alpha)^k * lam (lam-1) ... (lam-k+1) / k!``; exact when all
    inputs are rationals.
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if not zeta1 < zeta2:
        raise ValueError("need zeta1 < zeta2")
    if lam >= 0 and lam == int(lam):
        raise ValueError("lam is a nonnegative integer: use power() instead")
    exact = all(isinstance(v, (int, Fraction)) for v in (alpha, beta, lam))
    ratio = Fraction(beta) / Fraction(alpha) if exact else float(beta) / float(alpha)
    coeffs = [Fraction(1) if exact else 1.0]
    for k in range(1, K + 1):
        coeffs.append(coeffs[-1] * ratio * (lam - (k - 1)) / k)
    dz = zeta2 - zeta1
    exps = tuple(lam * zeta1 + k * dz for k in range(K + 1))
    radius = math.inf if beta == 0 else abs(float(alpha) / float(beta)) ** (1 / float(dz))
    return BinomialSeries(alpha, beta, zeta1, zeta2, lam, tuple(coeffs), exps, radius)


def convergence_exponent(coeffs: Sequence, exps: Sequence) -> tuple[float, float]:
    """Finite-sample proxy ``L = max_{last half} |a_k|^{1/s_k}`` and radius ``1/L``."""
    if len(coeffs) != len(exps) or not coeffs:
        raise ValueError("coefficient and exponent lists must be nonempty and equal length")
    s = [float(v) for v in exps]
    if any(v <= 0 for v in s) or any(b <= a for a, b in zip(s, s[1:])):
        raise ValueError("exponents must be positive and increasing")
    half = len(coeffs) // 2
    L = max(abs(float(a)) ** (1.0 / e) for a, e in zip(coeffs[half:], s[half:]))
    return L, (math.inf if L == 0 else 1.0 / L)


def clarkson_erdos_check(
    coeffs: Sequence[float],
    seq: ExponentSequence,
    f_norm: float,
    eps: float,
    p: float = 2.0,
) -> list[int]:
    """Indices ``k`` (1-based) violating ``|b_k| ||x^{l_k}||_p <= (1+eps)^{l_k} ||f||_p``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    bad = []
    for k, (b, lam) in enumerate(zip(coeffs, seq.values), start=1):
        lhs = abs(float(b)) * (p * lam + 1) ** (-1.0 / p)
        rhs = (1 + eps) ** lam * f_norm
        if lhs > rhs * (1 + 1e-12):
            bad.append(k)
    return bad
