"""Small expression language for functions on [0, 1].

Symbols ``phi``, densities ``h`` and weights ``psi`` are all written in this
language, e.g. ``"1 - abs(2*x - 1)"`` or
``"piecewise((x <= 0.5, 1), 0)"``.

Grammar (lowest to highest precedence)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' exponent)?        # right associative
    exponent := '-' exponent | primary ('^' exponent)?   # must be constant
    primary  := NUMBER | 'x' | '(' expr ')' | FUNC '(' args ')'

``FUNC`` is one of ``abs``, ``sqrt``, ``min``, ``max``, ``piecewise``.  A
``piecewise`` call takes ``(cond, expr)`` pairs followed by a final else
expression; ``cond`` is ``x < c``, ``x <= c`` or ``x in [a, b]``.

Trees are immutable; evaluation works on floats and on numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Cond",
    "Piecewise",
    "ParseError",
    "DomainError",
    "parse",
    "to_text",
    "evaluate",
    "evaluate_array",
    "breakpoints",
    "is_constant",
    "constant_value",
    "is_polynomial",
    "polynomial_coefficients",
]


class ParseError(ValueError):
    """Syntax error or unknown identifier; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the real domain (division by zero, negative root...)."""

    def __init__(self, message: str, subexpr: "Expr", x: float | None = None):
        where = f" at x={x!r}" if x is not None else ""
        super().__init__(f"{message} in {to_text(subexpr)}{where}")
        self.subexpr = subexpr
        self.x = x


# --------------------------------------------------------------------------- #
# AST
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Num:
    """Numeric literal; ``text`` keeps the exact decimal spelling."""

    text: str
    value: float

    @property
    def exact(self) -> Fraction:
        return Fraction(self.text)


@dataclass(frozen=True)
class Var:
    name: str = "x"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str  # abs, sqrt, min, max
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Cond:
    """``x < hi``, ``x <= hi`` or ``x in [lo, hi]``."""

    kind: str  # "<", "<=", "in"
    lo: "Expr | None"
    hi: "Expr"


@dataclass(frozen=True)
class Piecewise:
    branches: tuple[tuple[Cond, "Expr"], ...]
    otherwise: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, Piecewise]

_FUNCS = {"abs": 1, "sqrt": 1, "min": 2, "max": 2}


# --------------------------------------------------------------------------- #
# Tokenizer
# --------------------------------------------------------------------------- #

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|[-+*/^(),<\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text.encode())))
    return toks


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode())


# --------------------------------------------------------------------------- #
# Parser
# --------------------------------------------------------------------------- #


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: str | None = None) -> _Tok:
        tok = self.tok
        if text is not None and tok.text != text:
            found = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok.pos)
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.text == "^":
            pos = self.take().pos
            exponent = self.exponent()
            if not is_constant(exponent):
                raise ParseError("exponent of '^' must be a constant", pos)
            return BinOp("^", base, exponent)
        return base

    def exponent(self) -> Expr:
        if self.accept("-"):
            return Neg(self.exponent())
        return self.power()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError(f"literal {tok.text} is not finite", tok.pos)
            return Num(tok.text, value)
        if tok.kind == "name":
            self.take()
            if tok.text == "x":
                return Var("x")
            if tok.text in _FUNCS:
                return self.call(tok)
            if tok.text == "piecewise":
                return self.piecewise()
            raise ParseError(f"unknown identifier {tok.text!r}", tok.pos)
        if self.accept("("):
            e = self.expr()
            self.take(")")
            return e
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", tok.pos)

    def call(self, name: _Tok) -> Expr:
        self.take("(")
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.take(")")
        if len(args) != _FUNCS[name.text]:
            raise ParseError(
                f"{name.text} takes {_FUNCS[name.text]} argument(s), got {len(args)}",
                name.pos,
            )
        return Call(name.text, tuple(args))

    def piecewise(self) -> Expr:
        self.take("(")
        branches: list[tuple[Cond, Expr]] = []
        while True:
            # A branch is "(cond, expr)"; anything else is the else-expression.
            if self.tok.text == "(" and self._looks_like_branch():
                self.take("(")
                cond = self.condition()
                self.take(",")
                branches.append((cond, self.expr()))
                self.take(")")
                self.take(",")
                continue
            otherwise = self.expr()
            self.take(")")
            break
        if not branches:
            raise ParseError("piecewise needs at least one (cond, expr) branch", self.tok.pos)
        return Piecewise(tuple(branches), otherwise)

    def _looks_like_branch(self) -> bool:
        nxt = self.toks[self.i + 1]
        after = self.toks[self.i + 2]
        return nxt.text == "x" and after.text in ("<", "<=", "in")

    def condition(self) -> Cond:
        self.take("x")
        tok = self.take()
        if tok.text in ("<", "<="):
            hi = self.constant_expr()
            return Cond(tok.text, None, hi)
        if tok.text == "in":
            self.take("[")
            lo = self.constant_expr()
            self.take(",")
            hi = self.constant_expr()
            self.take("]")
            return Cond("in", lo, hi)
        raise ParseError(f"expected '<', '<=' or 'in', found {tok.text!r}", tok.pos)

    def constant_expr(self) -> Expr:
        pos = self.tok.pos
        e = self.expr()
        if not is_constant(e):
            raise ParseError("condition bounds must be constants", pos)
        return e


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ParseError
        On syntax errors or unknown identifiers; carries the byte offset.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


# --------------------------------------------------------------------------- #
# Printer
# --------------------------------------------------------------------------- #


def to_text(e: Expr | Cond) -> str:
    """Canonical, fully parenthesized form; ``parse(to_text(e)) == e``."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_text(a) for a in e.args)})"
    if isinstance(e, Cond):
        if e.kind == "in":
            return f"x in [{to_text(e.lo)}, {to_text(e.hi)}]"
        return f"x {e.kind} {to_text(e.hi)}"
    if isinstance(e, Piecewise):
        parts = [f"({to_text(c)}, {to_text(v)})" for c, v in e.branches]
        parts.append(to_text(e.otherwise))
        return f"piecewise({', '.join(parts)})"
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------- #
# Evaluation
# --------------------------------------------------------------------------- #


def _walk(e: Expr) -> Iterator[Expr | Cond]:
    yield e
    if isinstance(e, Neg):
        yield from _walk(e.operand)
    elif isinstance(e, BinOp):
        yield from _walk(e.left)
        yield from _walk(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from _walk(a)
    elif isinstance(e, Piecewise):
        for c, v in e.branches:
            yield c
            if c.lo is not None:
                yield from _walk(c.lo)
            yield from _walk(c.hi)
            yield from _walk(v)
        yield from _walk(e.otherwise)


def is_constant(e: Expr) -> bool:
    return not any(isinstance(n, Var) for n in _walk(e))


def constant_value(e: Expr) -> Fraction:
    """Exact value of a constant tree built from literals, + - * / and integer ^."""
    if isinstance(e, Num):
        return e.exact
    if isinstance(e, Neg):
        return -constant_value(e.operand)
    if isinstance(e, BinOp):
        a, b = constant_value(e.left), constant_value(e.right)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0:
                raise DomainError("division by zero", e)
            return a / b
        if e.op == "^" and b.denominator == 1:
            if a == 0 and b < 0:
                raise DomainError("division by zero", e)
            return a ** int(b)
    raise ValueError(f"{to_text(e)} has no exact rational value")


def _eval(e: Expr, x: np.ndarray) -> np.ndarray:
    if isinstance(e, Num):
        return np.full_like(x, e.value)
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.operand, x)
    if isinstance(e, BinOp):
        a = _eval(e.left, x)
        if e.op == "^":
            return _pow(e, a, _const_float(e.right), x)
        b = _eval(e.right, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        bad = b == 0
        if bad.any():
            raise DomainError("division by zero", e, float(x[bad][0]))
        return a / b
    if isinstance(e, Call):
        vals = [_eval(a, x) for a in e.args]
        if e.func == "abs":
            return np.abs(vals[0])
        if e.func == "sqrt":
            bad = vals[0] < 0
            if bad.any():
                raise DomainError("square root of a negative number", e, float(x[bad][0]))
            return np.sqrt(vals[0])
        if e.func == "min":
            return np.minimum(vals[0], vals[1])
        return np.maximum(vals[0], vals[1])
    if isinstance(e, Piecewise):
        out = _eval(e.otherwise, x)
        done = np.zeros(x.shape, dtype=bool)
        picks = []
        for cond, value in e.branches:
            mask = _cond(cond, x) & ~done
            done |= mask
            picks.append(mask)
        # Later branches first so that the first true condition wins.
        for (cond, value), mask in reversed(list(zip(e.branches, picks))):
            if mask.any():
                out = np.where(mask, _eval_masked(value, x, mask), out)
        return out
    raise TypeError(f"not an expression: {e!r}")


def _eval_masked(e: Expr, x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # Branch expressions are only evaluated where their condition selects x.
    out = np.zeros_like(x)
    out[mask] = _eval(e, x[mask])
    return out


def _cond(c: Cond, x: np.ndarray) -> np.ndarray:
    hi = _const_float(c.hi)
    if c.kind == "<":
        return x < hi
    if c.kind == "<=":
        return x <= hi
    return (x >= _const_float(c.lo)) & (x <= hi)


def _const_float(e: Expr) -> float:
    return float(_eval(e, np.zeros(1))[0])


def _pow(e: BinOp, base: np.ndarray, p: float, x: np.ndarray) -> np.ndarray:
    if p == int(p):
        if p < 0 and (base == 0).any():
            raise DomainError("division by zero", e, float(x[base == 0][0]))
        return np.power(base, p)
    bad = base < 0
    if bad.any():
        raise DomainError("negative base with non-integer exponent", e, float(x[bad][0]))
    if p < 0 and (base == 0).any():
        raise DomainError("division by zero", e, float(x[base == 0][0]))
    return np.power(base, p)


def evaluate_array(e: Expr, x) -> np.ndarray:
    """Vectorized evaluation; raises :class:`DomainError` on the first bad point."""
    xs = np.asarray(x, dtype=float)
    flat = xs.ravel()
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = _eval(e, flat)
    out = np.broadcast_to(out, flat.shape).astype(float)
    bad = ~np.isfinite(out)
    if bad.any():
        raise DomainError("non-finite value", e, float(flat[bad][0]))
    return out.reshape(xs.shape)


def evaluate(e: Expr, x: float) -> float:
    """Evaluate ``e`` at a single point."""
    return float(evaluate_array(e, np.array([float(x)]))[0])


# --------------------------------------------------------------------------- #
# Structural queries
# --------------------------------------------------------------------------- #


def breakpoints(e: Expr) -> list[float]:
    """Points in [0, 1] where a piecewise branch may switch."""
    pts: set[float] = set()
    for node in _walk(e):
        if isinstance(node, Cond):
            for bound in (node.lo, node.hi):
                if bound is not None:
                    v = _const_float(bound)
                    if 0.0 <= v <= 1.0:
                        pts.add(v)
    return sorted(pts)


def is_polynomial(e: Expr) -> bool:
    """True for trees built from x, literals, + - *, division by constants and
    nonnegative integer powers."""
    try:
        polynomial_coefficients(e)
    except ValueError:
        return False
    return True


def polynomial_coefficients(e: Expr) -> list[Fraction]:
    """Exact coefficients ``[c0, c1, ...]`` of a polynomial expression."""
    if isinstance(e, Num):
        return [e.exact]
    if isinstance(e, Var):
        return [Fraction(0), Fraction(1)]
    if isinstance(e, Neg):
        return [-c for c in polynomial_coefficients(e.operand)]
    if isinstance(e, BinOp):
        if e.op == "^":
            try:
                p = constant_value(e.right)
            except (ValueError, DomainError):
                raise ValueError("non-rational exponent") from None
            if p.denominator != 1 or p < 0:
                raise ValueError("exponent is not a nonnegative integer")
            base = polynomial_coefficients(e.left)
            out = [Fraction(1)]
            for _ in range(int(p)):
                out = _pmul(out, base)
            return out
        a = polynomial_coefficients(e.left)
        if e.op == "/":
            if not is_constant(e.right):
                raise ValueError("division by a non-constant")
            d = constant_value(e.right)
            if d == 0:
                raise ValueError("division by zero")
            return [c / d for c in a]
        b = polynomial_coefficients(e.right)
        if e.op == "*":
            return _pmul(a, b)
        n = max(len(a), len(b))
        a = a + [Fraction(0)] * (n - len(a))
        b = b + [Fraction(0)] * (n - len(b))
        sign = 1 if e.op == "+" else -1
        return [u + sign * v for u, v in zip(a, b)]
    raise ValueError(f"{to_text(e)} is not a polynomial")


def _pmul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        for j, v in enumerate(b):
            out[i + j] += u * v
    return out
