"""Iterated Lie derivatives of composed scalar fields and the left-iterated bracket.

A word ``(k1, ..., kl)`` with letters in {1, 2} denotes the scalar field
obtained by seeding with ``g_{k1}(J(x))`` and applying the Lie-derivative
operators of ``g_{k2}(J(x))``, ..., ``g_{kl}(J(x))`` in that order, where
``L_a b = a * db/dx`` for scalar fields on the line.

Affine shaping functions (``g(z) = a + b*z``, which covers the default and
gradient pairs) are differentiated exactly through a small polynomial
calculus in the cost's derivatives; any other pair falls back to nested
central finite differences, reliable only for short words.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .costs import CostModel, VectorFieldPair

__all__ = [
    "lie_derivative_word",
    "ad_bracket",
    "ad_bracket_recursive",
    "lie_bracket",
]

_EPS = float(np.finfo(float).eps)
MAX_FD_WORD_LEN = 4

# A field is a polynomial in the cost's derivatives, stored as
# {sorted tuple of derivative orders: coefficient}; the empty tuple is the
# constant term and order 0 stands for the cost value itself.
Poly = dict[tuple[int, ...], float]


def _poly_affine(affine: tuple[float, float]) -> Poly:
    a, b = affine
    out: Poly = {}
    if a != 0.0:
        out[()] = a
    if b != 0.0:
        out[(0,)] = b
    return out


def _poly_dx(p: Poly) -> Poly:
    out: Poly = {}
    for mono, coeff in p.items():
        for j in range(len(mono)):
            bumped = tuple(sorted(mono[:j] + (mono[j] + 1,) + mono[j + 1 :]))
            out[bumped] = out.get(bumped, 0.0) + coeff
    return {m: c for m, c in out.items() if c != 0.0}


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            mono = tuple(sorted(m1 + m2))
            out[mono] = out.get(mono, 0.0) + c1 * c2
    return {m: c for m, c in out.items() if c != 0.0}


def _poly_sub(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for mono, coeff in q.items():
        out[mono] = out.get(mono, 0.0) - coeff
    return {m: c for m, c in out.items() if c != 0.0}


def _poly_eval(p: Poly, model: CostModel, x: float) -> float:
    total = 0.0
    for mono, coeff in p.items():
        term = coeff
        for order in mono:
            term *= model.partial_derivative(0, order, [x])
        total += term
    return total


def _check_word(word: Sequence[int]) -> tuple[int, ...]:
    w = tuple(int(k) for k in word)
    if not w:
        raise ValueError("word must contain at least one letter")
    if any(k not in (1, 2) for k in w):
        raise ValueError(f"word letters must be 1 or 2, got {w}")
    return w


def _word_poly(word: tuple[int, ...], pair: VectorFieldPair) -> Poly:
    fields = {1: _poly_affine(pair.g1_affine), 2: _poly_affine(pair.g2_affine)}
    current = fields[word[0]]
    for letter in word[1:]:
        current = _poly_mul(fields[letter], _poly_dx(current))
    return current


def _fd_steps(depth: int, scale: float) -> list[float]:
    """Widening step sizes for nested central differences.

    Each nesting level inherits the level below's error, so steps widen
    outward: level j uses h_j with accumulated error ~ eps^((2/3)^j).
    """
    steps = []
    err = _EPS
    for _ in range(depth):
        h = err ** (1.0 / 3.0)
        steps.append(h * scale)
        err = err ** (2.0 / 3.0)
    return steps


def _word_fd(word: tuple[int, ...], pair: VectorFieldPair, model: CostModel, x: float) -> float:
    if len(word) > MAX_FD_WORD_LEN:
        raise ValueError(
            f"nested finite differencing supports words of length <= {MAX_FD_WORD_LEN}; "
            f"got length {len(word)}"
        )
    gs = {1: pair.g1, 2: pair.g2}
    steps = _fd_steps(len(word) - 1, max(1.0, abs(x)))

    def value(j: int, pt: float) -> float:
        if j == 0:
            return float(gs[word[0]](model([pt])))
        h = steps[j - 1]
        slope = (value(j - 1, pt + h) - value(j - 1, pt - h)) / (2.0 * h)
        return float(gs[word[j]](model([pt]))) * slope

    return value(len(word) - 1, float(x))


def lie_derivative_word(
    word: Sequence[int], pair: VectorFieldPair, model: CostModel, x: float
) -> float:
    """Evaluate the iterated Lie derivative named by ``word`` at ``x``.

    One-dimensional models only. Affine pairs are evaluated exactly
    (given exact cost derivatives); other pairs use nested central
    differences and are limited to words of length 4.
    """
    w = _check_word(word)
    if model.dimension != 1:
        raise ValueError("lie_derivative_word requires a one-dimensional cost")
    if pair.is_affine:
        return _poly_eval(_word_poly(w, pair), model, float(x))
    return _word_fd(w, pair, model, x)


def _binomial_words(order: int) -> list[tuple[float, tuple[int, ...]]]:
    terms = []
    for k in range(order + 1):
        word = (1,) * k + (2,) + (1,) * (order - k)
        terms.append(((-1.0) ** k * math.comb(order, k), word))
    return terms


def ad_bracket(order: int, pair: VectorFieldPair, model: CostModel, x: float) -> float:
    """Left-iterated bracket of the composed pair, order-fold, at ``x``.

    Computed as the alternating binomial sum of word values; for the
    default pair this equals ``-sigma`` times the pure derivative of the
    cost of the same order.
    """
    if order < 1:
        raise ValueError("bracket order must be >= 1")
    return sum(
        coeff * lie_derivative_word(word, pair, model, x)
        for coeff, word in _binomial_words(order)
    )


def ad_bracket_recursive(order: int, pair: VectorFieldPair, model: CostModel, x: float) -> float:
    """Oracle for ad_bracket: expand one bracket level at a time.

    Structurally independent of the binomial-sum path. Affine pairs use
    the exact polynomial calculus; other pairs nest finite differences
    and are limited to order 3.
    """
    if order < 1:
        raise ValueError("bracket order must be >= 1")
    if model.dimension != 1:
        raise ValueError("ad_bracket_recursive requires a one-dimensional cost")
    if pair.is_affine:
        g1 = _poly_affine(pair.g1_affine)
        current = _poly_affine(pair.g2_affine)
        for _ in range(order):
            current = _poly_sub(_poly_mul(g1, _poly_dx(current)), _poly_mul(current, _poly_dx(g1)))
        return _poly_eval(current, model, float(x))
    if order > 3:
        raise ValueError("recursive bracket via finite differences supports order <= 3")

    def compose(g: Callable[[float], float]) -> Callable[[float], float]:
        return lambda pt: float(g(model([pt])))

    steps = _fd_steps(order, max(1.0, abs(x)))

    def bracket(a, b, h):
        def out(pt: float) -> float:
            da = (a(pt + h) - a(pt - h)) / (2.0 * h)
            db = (b(pt + h) - b(pt - h)) / (2.0 * h)
            return a(pt) * db - b(pt) * da

        return out

    current = compose(pair.g2)
    base = compose(pair.g1)
    for level in range(order):
        current = bracket(base, current, steps[level])
    return current(float(x))


def lie_bracket(
    first: int, second: int, pair: VectorFieldPair, model: CostModel, x: float
) -> float:
    """Plain bracket [g_first, g_second] of the composed fields at ``x``."""
    if first not in (1, 2) or second not in (1, 2):
        raise ValueError("channel indices must be 1 or 2")
    return lie_derivative_word((second, first), pair, model, x) - lie_derivative_word(
        (first, second), pair, model, x
    )
