"""Muntz-space embeddings, composition operators and real-exponent polynomials.

Modules
-------
exprdsl     expression language for densities and maps
exponents   exponent sequences and their growth diagnostics
realpoly    exact algebra of polynomials with real exponents
measure     measures on [0, 1], pullbacks and tail profiles
embedding   finite-section spectra and classification of L^2(mu) embeddings
compop      composition operators f -> f(phi)
cli         the ``muntz`` command
"""

from __future__ import annotations

__version__ = "0.1.0"

from .compop import classify_compop, compop_svals, compop_tail_estimates, essential_norm_formula
from .embedding import (
    classify_embedding,
    embedding_svals,
    essential_norm_estimate,
    operator_norm_estimate,
    schatten_qnorm,
)
from .exponents import ExponentSequence, geometric, lacunarity, parse_sequence, quasilacunary
from .exprdsl import evaluate, parse
from .measure import MeasureSpec, lebesgue, literal, pullback, sublinearity_profile, tail_mass
from .realpoly import invariance_test, parse_poly, power, schinzel_check

__all__ = [
    "__version__",
    "ExponentSequence",
    "MeasureSpec",
    "classify_compop",
    "classify_embedding",
    "compop_svals",
    "compop_tail_estimates",
    "embedding_svals",
    "essential_norm_estimate",
    "essential_norm_formula",
    "evaluate",
    "geometric",
    "invariance_test",
    "lacunarity",
    "lebesgue",
    "literal",
    "operator_norm_estimate",
    "parse",
    "parse_poly",
    "parse_sequence",
    "power",
    "pullback",
    "quasilacunary",
    "schatten_qnorm",
    "schinzel_check",
    "sublinearity_profile",
    "tail_mass",
]
