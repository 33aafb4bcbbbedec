"""Quadrature oracle for iterated dither integrals and excitation certification.

Conventions. A channel word lists integration variables outermost first:
word ``(w1, ..., wl)`` names the integral of
``v_{w1}(s1) * v_{w2}(s2) * ... * v_{wl}(sl)`` over the simplex
``0 <= sl <= ... <= s1 <= epsilon``, matching the seeding convention of
the bracket engine (seed letter <-> outermost variable). The oracle
integrates unit-amplitude waveforms; design coefficients are multiplied
back in symbolically, which keeps small-epsilon arithmetic well scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .dither import DitherChannel, DitherSpec

__all__ = [
    "IntegralRequest",
    "iterated_integral",
    "closed_form_I",
    "WordCheck",
    "ExcitationCertificate",
    "certify_excitation",
]

DEFAULT_GRID_POINTS = 200_000
TOL_VANISH = 1e-6
TOL_COLLAPSE = 1e-5
MAX_CERTIFIED_LEN = 6


@dataclass(frozen=True)
class IntegralRequest:
    """One iterated integral: channels listed outermost first."""

    channels: tuple[DitherChannel, ...]
    epsilon: float
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self) -> None:
        if not self.channels:
            raise ValueError("at least one channel is required")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.grid_points < 1000:
            raise ValueError("grid_points must be at least 1000")


def _unit_waveform(channel: DitherChannel, epsilon: float, t: np.ndarray) -> np.ndarray:
    phase = (2.0 * math.pi * channel.frequency_multiple * channel.kappa / epsilon) * t
    if channel.waveform == "cosine":
        return np.cos(phase)
    return np.sin(phase)


def iterated_integral(request: IntegralRequest) -> float:
    """Quadrature of the request's iterated integral over [0, epsilon].

    Successive cumulative trapezoid passes, innermost integrand first, on
    a uniform grid. Unit amplitudes: channel coefficients and epsilon
    power factors are deliberately not applied.
    """
    t = np.linspace(0.0, request.epsilon, request.grid_points + 1)
    inner = np.ones_like(t)
    for channel in reversed(request.channels):
        integrand = _unit_waveform(channel, request.epsilon, t) * inner
        inner = np.concatenate(([0.0], cumulative_trapezoid(integrand, t)))
    return float(inner[-1])


def closed_form_I(k: int, order: int, kappa: int = 1, epsilon: float = 1.0) -> float:
    """Closed form of the surviving length-(order+1) integral, index k.

    Value: epsilon^(order+1) * (-1)^(floor(order/2)+k)
    / ((4*pi*kappa)^order * k! * (order-k)!).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not 0 <= k <= order:
        raise ValueError(f"k must lie in [0, {order}], got {k}")
    sign = (-1.0) ** (order // 2 + k)
    denom = (4.0 * math.pi * kappa) ** order * math.factorial(k) * math.factorial(order - k)
    return epsilon ** (order + 1) * sign / denom


@dataclass(frozen=True)
class WordCheck:
    """One certified word: a vanishing bound or a collapse-identity match."""

    word: tuple[int, ...]
    kind: str  # "vanish" or "collapse"
    value: float
    target: float
    bound: float
    passed: bool
    ratio: float


@dataclass(frozen=True)
class ExcitationCertificate:
    order: int
    kappa: int
    epsilon: float
    grid_points: int
    passed: bool
    checks: tuple[WordCheck, ...] = field(repr=False)
    worst: WordCheck | None = None

    @property
    def failures(self) -> tuple[WordCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


def _single_two_position(word: tuple[int, ...]) -> int | None:
    """Index of the only channel-2 letter, or None if not exactly one."""
    positions = [i for i, w in enumerate(word) if w == 2]
    return positions[0] if len(positions) == 1 else None


def certify_excitation(
    spec: DitherSpec,
    max_len: int | None = None,
    grid_points: int = DEFAULT_GRID_POINTS,
    tol_vanish: float = TOL_VANISH,
    tol_collapse: float = TOL_COLLAPSE,
) -> ExcitationCertificate:
    """Verify that a single-pair design excites exactly the target bracket.

    Checks, by brute-force quadrature with amplitudes factored out:
    every word of length up to the design order integrates to zero
    within ``tol_vanish`` (normalized by epsilon^length), and each
    length-(order+1) word with exactly one channel-2 letter at position
    k+1 satisfies c1^order * c2 * integral =
    epsilon^(order+1) * (-1)^k * binom(order, k) to ``tol_collapse``
    relative; remaining words of that length must vanish.
    """
    if len(spec.pairs) != 1:
        raise ValueError("certification covers single-pair designs only")
    order = spec.order
    if max_len is None:
        max_len = order + 1
    if max_len < order + 1:
        raise ValueError(f"max_len must be at least order+1 = {order + 1}")
    if max_len > MAX_CERTIFIED_LEN:
        raise ValueError(
            f"word enumeration capped at length {MAX_CERTIFIED_LEN}, got max_len={max_len}"
        )
    ch1, ch2 = spec.pairs[0]
    kappa = ch1.kappa
    eps = spec.epsilon
    channel_by_letter = {1: ch1, 2: ch2}
    coefficient_by_letter = {1: ch1.coefficient, 2: ch2.coefficient}

    checks: list[WordCheck] = []
    for length in range(1, order + 2):
        for letters in product((1, 2), repeat=length):
            word = tuple(letters)
            req = IntegralRequest(
                channels=tuple(channel_by_letter[w] for w in word),
                epsilon=eps,
                grid_points=grid_points,
            )
            integral = iterated_integral(req)
            k = _single_two_position(word) if length == order + 1 else None
            if k is None:
                bound = tol_vanish * eps**length
                ratio = abs(integral) / bound
                checks.append(
                    WordCheck(
                        word=word,
                        kind="vanish",
                        value=integral,
                        target=0.0,
                        bound=bound,
                        passed=abs(integral) <= bound,
                        ratio=ratio,
                    )
                )
            else:
                amp = math.prod(coefficient_by_letter[w] for w in word)
                value = amp * integral
                target = eps ** (order + 1) * (-1.0) ** k * math.comb(order, k)
                ratio = abs(value - target) / abs(target)
                checks.append(
                    WordCheck(
                        word=word,
                        kind="collapse",
                        value=value,
                        target=target,
                        bound=tol_collapse,
                        passed=ratio <= tol_collapse,
                        ratio=ratio,
                    )
                )
    worst = max(checks, key=lambda c: c.ratio) if checks else None
    return ExcitationCertificate(
        order=order,
        kappa=kappa,
        epsilon=eps,
        grid_points=grid_points,
        passed=all(c.passed for c in checks),
        checks=tuple(checks),
        worst=worst,
    )
