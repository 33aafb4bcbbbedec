"""Dither signal design for high-order Lie-bracket extremum seeking.

A scalar extremum-seeking loop of bracket order ``N`` drives a pair of
input channels with sinusoids of frequency ``kappa/eps`` and
``N*kappa/eps`` (cycles per unit time) and amplitude ``c * eps**(-N/(N+1))``.
When the two base coefficients satisfy

    c1**N * c2 == (4*pi*kappa)**N * N! * (-1)**(N//2)

the only word of length N+1 surviving averaging over one period is the
left-iterated bracket of the two control fields, with unit gain.  This
module constructs such channel pairs, evaluates them, and screens
frequency sets for the multi-variable case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DitherChannel",
    "DitherSpec",
    "ResonanceReport",
    "bracket_coefficient",
    "design_dithers",
    "design_multivariable",
    "eval_dither",
    "check_nonresonance",
]

#: relative tolerance on the coefficient product constraint
COEFFICIENT_RTOL = 1e-12

_WAVEFORMS = ("cosine", "sine")


@dataclass(frozen=True)
class DitherChannel:
    """One sinusoidal input channel.

    The physical signal is ``coefficient * eps**(-exponent) * w(arg)`` with
    ``w`` either cosine or sine and ``arg = 2*frequency_multiple*kappa*pi*t/eps``.
    ``coefficient`` carries the sign; ``exponent`` is ``N/(N+1)`` for a
    bracket order ``N`` design.
    """

    coefficient: float
    exponent: float
    frequency_multiple: int
    waveform: str
    kappa: int

    def __post_init__(self) -> None:
        if self.waveform not in _WAVEFORMS:
            raise ValueError(f"waveform must be one of {_WAVEFORMS}, got {self.waveform!r}")
        if self.frequency_multiple < 1:
            raise ValueError("frequency_multiple must be a positive integer")
        if self.kappa < 1:
            raise ValueError("kappa must be a positive integer")
        if not 0.0 <= self.exponent < 1.0:
            raise ValueError("amplitude exponent must lie in [0, 1)")


@dataclass(frozen=True)
class DitherSpec:
    """A complete dither design: one channel pair per state coordinate."""

    order: int
    pairs: tuple[tuple[DitherChannel, DitherChannel], ...]
    epsilon: float

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not self.pairs:
            raise ValueError("at least one channel pair is required")
        for ch1, ch2 in self.pairs:
            self._check_pair(ch1, ch2)

    def _check_pair(self, ch1: DitherChannel, ch2: DitherChannel) -> None:
        n = self.order
        if ch1.kappa != ch2.kappa:
            raise ValueError("channels of a pair must share kappa")
        if ch1.frequency_multiple != 1 or ch2.frequency_multiple not in (1, n):
            # Multiple 1 on channel 2 is accepted so a deliberately detuned
            # spec can be built and fed to the excitation certifier.
            raise ValueError(
                f"pair must use frequency multiples (1, {n}), got "
                f"({ch1.frequency_multiple}, {ch2.frequency_multiple})"
            )
        want2 = "sine" if n % 2 == 1 else "cosine"
        if ch1.waveform != "cosine" or ch2.waveform != want2:
            raise ValueError(
                f"order {n} requires waveforms ('cosine', '{want2}'), got "
                f"({ch1.waveform!r}, {ch2.waveform!r})"
            )
        target = bracket_coefficient(n, ch1.kappa)
        have = ch1.coefficient**n * ch2.coefficient
        if not math.isclose(have, target, rel_tol=COEFFICIENT_RTOL):
            raise ValueError(
                f"coefficient product c1**{n}*c2 = {have!r} does not match the "
                f"bracket normalization {target!r}"
            )

    @property
    def dimension(self) -> int:
        return len(self.pairs)

    @property
    def kappas(self) -> tuple[int, ...]:
        return tuple(p[0].kappa for p in self.pairs)


@dataclass(frozen=True)
class ResonanceReport:
    """Outcome of the arithmetic non-resonance screen.

    ``witness`` is a per-coordinate list of ``(mu_i, nu_i)`` integer pairs
    exhibiting an unintended zero frequency combination; it is ``None``
    when the screen passes.
    """

    kappas: tuple[int, ...]
    order: int
    passes: bool
    witness: tuple[tuple[int, int], ...] | None
    tuples_checked: int


def bracket_coefficient(order: int, kappa: int = 1) -> float:
    """Required value of ``c1**order * c2`` for unit bracket gain.

    >>> round(bracket_coefficient(1), 6)
    12.566371
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if kappa < 1:
        raise ValueError("kappa must be a positive integer")
    return (4.0 * math.pi * kappa) ** order * math.factorial(order) * (-1.0) ** (order // 2)


def _split_coefficients(order: int, kappa: int, split: str) -> tuple[float, float]:
    target = bracket_coefficient(order, kappa)
    if split == "equal_magnitude":
        mag = abs(target) ** (1.0 / (order + 1))
        return mag, math.copysign(mag, target)
    if split == "unit_c1":
        return 1.0, target
    raise ValueError(f"unknown split rule {split!r}")


def _make_pair(order: int, kappa: int, split: str) -> tuple[DitherChannel, DitherChannel]:
    c1, c2 = _split_coefficients(order, kappa, split)
    p = order / (order + 1.0)
    ch1 = DitherChannel(c1, p, 1, "cosine", kappa)
    ch2 = DitherChannel(c2, p, order, "sine" if order % 2 == 1 else "cosine", kappa)
    return ch1, ch2


def design_dithers(
    order: int,
    kappa: int = 1,
    epsilon: float = 1.0,
    split: str = "equal_magnitude",
) -> DitherSpec:
    """Design a single channel pair exciting the order-``order`` bracket.

    ``split`` distributes the coefficient product: ``"equal_magnitude"``
    gives ``|c1| == |c2|`` with the sign carried by ``c2`` (``c1 > 0``);
    ``"unit_c1"`` puts the whole product on ``c2``.

    >>> spec = design_dithers(1)
    >>> round(spec.pairs[0][0].coefficient, 6)  # 2*sqrt(pi)
    3.544908
    """
    return DitherSpec(order, (_make_pair(order, kappa, split),), epsilon)


def design_multivariable(
    degree: int,
    kappas: Sequence[int],
    epsilon: float = 1.0,
    split: str = "equal_magnitude",
) -> DitherSpec:
    """Design one channel pair per coordinate for a degree-``degree`` cost.

    The bracket order is ``degree - 1`` for every coordinate; coordinate
    ``i`` uses base frequency ``kappas[i]`` and coefficients normalized
    with its own ``kappas[i]`` so each coordinate's bracket carries unit
    gain.  The channel-2 waveform parity follows ``degree - 1`` uniformly.
    Raises ``ValueError`` when the frequency screen finds a resonance.
    """
    order = degree - 1
    if order < 1:
        raise ValueError("degree must be >= 2")
    report = check_nonresonance(kappas, order)
    if not report.passes:
        raise ValueError(
            f"kappas {tuple(kappas)} fail the non-resonance screen at order "
            f"{order}; witness (mu_i, nu_i) per coordinate: {report.witness}"
        )
    pairs = tuple(_make_pair(order, int(k), split) for k in kappas)
    return DitherSpec(order, pairs, epsilon)


def eval_dither(channel: DitherChannel, epsilon: float, t):
    """Evaluate a channel at time ``t`` (scalar or array).

    The argument is reduced modulo ``epsilon`` first, so the returned
    signal is exactly ``epsilon``-periodic.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    tau = np.mod(t, epsilon)
    arg = (2.0 * math.pi * channel.frequency_multiple * channel.kappa / epsilon) * tau
    wave = np.cos(arg) if channel.waveform == "cosine" else np.sin(arg)
    return channel.coefficient * epsilon ** (-channel.exponent) * wave


def _iter_bounded_tuples(n: int, budget: int) -> Iterable[tuple[int, ...]]:
    """Integer n-tuples with L1 norm <= budget, by increasing L1 norm."""
    for total in range(budget + 1):
        for mags in _compositions(total, n):
            signs = [(1,) if m == 0 else (1, -1) for m in mags]
            for sgn in product(*signs):
                yield tuple(m * s for m, s in zip(mags, sgn))


def _compositions(total: int, n: int) -> Iterable[tuple[int, ...]]:
    if n == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, n - 1):
            yield (head,) + rest


def check_nonresonance(
    kappas: Sequence[int],
    order: int,
    max_tuples: int = 10**8,
) -> ResonanceReport:
    """Arithmetic screen for unintended frequency resonances.

    With per-coordinate base frequencies ``kappas[i]`` and second-channel
    frequencies ``order * kappas[i]``, the screen enumerates integer
    combinations ``sum_i (mu_i + order*nu_i) * kappas[i]`` and fails when
    an unintended combination vanishes.  Channel-2 counts ``nu_i`` are
    budgeted at ``order`` units each (their single-occurrence short words
    cancel by waveform parity), so the enumeration covers

        sum_i |mu_i| + order * |nu_i|  <=  order,

    plus an explicit pairwise collision test ``order*kappas[i] == kappas[j]``
    which catches the one cross pattern (channel 2 against channel 1 of
    another coordinate, cosine against sine at equal frequency) that
    parity does not cancel.

    This is a screen, not a proof: it decides the frequency sets used by
    the built-in presets correctly, while word-level certification for a
    single pair lives in :func:`lieseek.integrals.certify_excitation`.

    Raises ``ValueError`` when the enumeration would exceed ``max_tuples``.
    """
    kap = tuple(int(k) for k in kappas)
    if order < 1:
        raise ValueError("order must be >= 1")
    if any(k < 1 for k in kap):
        raise ValueError("kappas must be positive integers")
    n = len(kap)

    # pairwise channel-2 / channel-1 frequency collisions
    checked = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            checked += 1
            if order * kap[i] == kap[j]:
                witness = tuple(
                    (0, 1) if a == i else ((-order, 0) if a == j else (0, 0))
                    for a in range(n)
                )
                return ResonanceReport(kap, order, False, witness, checked)

    # signed channel-1 combinations; channel-2 entries cost `order` each,
    # which inside a budget of `order` admits at most a lone nu with all
    # mu zero, and that combination cannot vanish.  Enumerate mu only.
    count_estimate = _tuple_count(n, order)
    if count_estimate > max_tuples:
        raise ValueError(
            f"non-resonance enumeration needs about {count_estimate:.3g} tuples, "
            f"above the cap of {max_tuples:.3g}; reduce the order or dimension"
        )
    for mu in _iter_bounded_tuples(n, order):
        checked += 1
        if all(m == 0 for m in mu):
            continue
        if sum(m * k for m, k in zip(mu, kap)) == 0:
            witness = tuple((m, 0) for m in mu)
            return ResonanceReport(kap, order, False, witness, checked)
    return ResonanceReport(kap, order, True, None, checked)


def _tuple_count(n: int, budget: int) -> float:
    """Upper bound on the number of signed tuples with L1 norm <= budget."""
    total = 0.0
    for s in range(budget + 1):
        total += math.comb(s + n - 1, n - 1) * 2.0 ** min(s, n)
    return total
