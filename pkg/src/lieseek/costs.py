"""Cost functions, control vector-field pairs, and power-law bound checks.

The seeking loop acts on a smooth cost ``J`` through two scalar shaping
functions ``g1`` and ``g2`` applied to the measured value ``J(x)``.  The
built-in models expose exact pure partial derivatives of every order;
user-supplied costs fall back to central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "CostModel",
    "VectorFieldPair",
    "AssumptionReport",
    "make_power_cost",
    "make_quartic_2d",
    "make_separable_cost",
    "default_pair",
    "gradient_pair",
    "verify_assumption",
    "fd_partial",
]

_EPS = float(np.finfo(float).eps)


def _fd_coefficients(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric central stencil (offsets, weights) for the k-th derivative.

    Odd k uses offsets ±1..±((k+1)/2) (k+1 points), even k uses
    ±1..±(k/2+1) (k+2 points); both are second-order accurate.
    """
    half = (k + 1) // 2 if k % 2 == 1 else k // 2 + 1
    offsets = np.array([o for o in range(-half, half + 1) if o != 0], dtype=float)
    rows = np.vander(offsets, len(offsets), increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[k] = math.factorial(k)
    return offsets, np.linalg.solve(rows, rhs)


def fd_partial(f: Callable[[np.ndarray], float], i: int, k: int, x: np.ndarray) -> float:
    """Central finite-difference pure partial of order ``k`` along axis ``i``."""
    if k == 0:
        return float(f(np.asarray(x, dtype=float)))
    x = np.asarray(x, dtype=float)
    h = _EPS ** (1.0 / (k + 2)) * max(1.0, abs(float(x[i])))
    offsets, weights = _fd_coefficients(k)
    acc = 0.0
    for o, w in zip(offsets, weights):
        xp = x.copy()
        xp[i] += o * h
        acc += w * f(xp)
    return acc / h**k


@dataclass(frozen=True)
class CostModel:
    """A cost with exact or finite-difference pure partial derivatives.

    ``kernel`` identifies a compiled fast path for the simulator:
    ``("separable", exponents, minimizer, scales)`` or ``("quartic2d",)``;
    ``None`` means the generic Python integration path is used.
    """

    dimension: int
    evaluate: Callable[[np.ndarray], float]
    minimizer: np.ndarray
    optimum: float
    name: str = "custom"
    exact_partial: Callable[[int, int, np.ndarray], float] | None = None
    kernel: tuple | None = None

    def partial_derivative(self, i: int, k: int, x) -> float:
        """Pure partial d^k J / dx_i^k at ``x`` (exact when available)."""
        if not 0 <= i < self.dimension:
            raise IndexError(f"coordinate {i} out of range for dimension {self.dimension}")
        if k < 0:
            raise ValueError("derivative order must be >= 0")
        pt = np.atleast_1d(np.asarray(x, dtype=float))
        if self.exact_partial is not None:
            return self.exact_partial(i, k, pt)
        return fd_partial(self.evaluate, i, k, pt)

    def derivative(self, k: int, x) -> float:
        """Scalar-cost convenience wrapper for ``partial_derivative(0, k, x)``."""
        if self.dimension != 1:
            raise ValueError("derivative() applies to one-dimensional costs only")
        return self.partial_derivative(0, k, x)

    def __call__(self, x) -> float:
        return float(self.evaluate(np.atleast_1d(np.asarray(x, dtype=float))))


@dataclass(frozen=True)
class VectorFieldPair:
    """Shaping functions ``g1``, ``g2`` applied to the measured cost.

    ``sigma`` is the loop gain in the target relation: the iterated
    bracket of the two composed fields equals ``-sigma`` times the pure
    ``N``-th cost derivative when the pair is bracket-compatible.
    ``g1_affine``/``g2_affine`` store ``(a, b)`` with ``g(z) = a + b*z``
    when the function is affine, enabling the exact bracket path and the
    compiled simulator kernel.
    """

    g1: Callable[[float], float]
    g2: Callable[[float], float]
    sigma: float = 1.0
    g1_affine: tuple[float, float] | None = None
    g2_affine: tuple[float, float] | None = None
    name: str = "custom"

    @property
    def is_affine(self) -> bool:
        return self.g1_affine is not None and self.g2_affine is not None


def default_pair(sigma: float = 1.0) -> VectorFieldPair:
    """The pair ``g1(z) = 1``, ``g2(z) = -sigma*z``.

    Composed with any cost, the order-``N`` iterated bracket collapses to
    ``-sigma`` times the pure ``N``-th derivative of the cost.
    """
    return VectorFieldPair(
        g1=lambda z: 1.0,
        g2=lambda z: -sigma * z,
        sigma=sigma,
        g1_affine=(1.0, 0.0),
        g2_affine=(0.0, -sigma),
        name="default",
    )


def gradient_pair() -> VectorFieldPair:
    """The first-order baseline pair ``g1(z) = z``, ``g2(z) = 1``.

    Its bracket equals minus the cost gradient, the classical
    gradient-seeking arrangement used for comparison runs.
    """
    return VectorFieldPair(
        g1=lambda z: z,
        g2=lambda z: 1.0,
        sigma=1.0,
        g1_affine=(0.0, 1.0),
        g2_affine=(1.0, 0.0),
        name="gradient",
    )


def make_power_cost(degree: int, x_star: float = 0.0, normalized: bool = True) -> CostModel:
    """One-dimensional flat-bottomed cost ``(x - x_star)**degree`` (/degree!).

    ``normalized=True`` divides by ``degree!`` so the pure derivative of
    order ``k`` is ``(x - x_star)**(degree-k) / (degree-k)!``.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    scale = 1.0 / math.factorial(degree) if normalized else 1.0
    xs = float(x_star)

    def evaluate(x: np.ndarray) -> float:
        return scale * (float(x[0]) - xs) ** degree

    def exact(i: int, k: int, x: np.ndarray) -> float:
        if k > degree:
            return 0.0
        coeff = scale * math.factorial(degree) / math.factorial(degree - k)
        return coeff * (float(x[0]) - xs) ** (degree - k)

    return CostModel(
        dimension=1,
        evaluate=evaluate,
        minimizer=np.array([xs]),
        optimum=0.0,
        name=f"power{degree}" + ("" if normalized else "_raw"),
        exact_partial=exact,
        kernel=("separable", (degree,), (xs,), (scale,)),
    )


def make_separable_cost(
    degrees: Sequence[int],
    x_star: Sequence[float],
    normalized: bool = True,
) -> CostModel:
    """Sum of per-coordinate power costs; coordinates do not interact."""
    degs = tuple(int(d) for d in degrees)
    xs = tuple(float(v) for v in x_star)
    if len(degs) != len(xs):
        raise ValueError("degrees and x_star must have equal length")
    scales = tuple(1.0 / math.factorial(d) if normalized else 1.0 for d in degs)

    def evaluate(x: np.ndarray) -> float:
        return float(sum(s * (float(x[i]) - xs[i]) ** d for i, (d, s) in enumerate(zip(degs, scales))))

    def exact(i: int, k: int, x: np.ndarray) -> float:
        d, s = degs[i], scales[i]
        if k == 0:
            return evaluate(x)
        if k > d:
            return 0.0
        return s * math.factorial(d) / math.factorial(d - k) * (float(x[i]) - xs[i]) ** (d - k)

    return CostModel(
        dimension=len(degs),
        evaluate=evaluate,
        minimizer=np.array(xs),
        optimum=0.0,
        name="separable" + "x".join(str(d) for d in degs),
        exact_partial=exact,
        kernel=("separable", degs, xs, scales),
    )


def make_quartic_2d() -> CostModel:
    """Coupled two-dimensional quartic ``(x1-1)**4 + (x1-x2)**4``.

    Flat-bottomed of degree 4 with minimizer ``(1, 1)``; the coordinates
    couple through the second term.
    """

    def evaluate(x: np.ndarray) -> float:
        a = float(x[0]) - 1.0
        b = float(x[0]) - float(x[1])
        return a**4 + b**4

    def exact(i: int, k: int, x: np.ndarray) -> float:
        a = float(x[0]) - 1.0
        b = float(x[0]) - float(x[1])
        if k == 0:
            return a**4 + b**4
        if i == 0:
            table = {1: 4 * (a**3 + b**3), 2: 12 * (a**2 + b**2), 3: 24 * (a + b), 4: 48.0}
        else:
            table = {1: -4 * b**3, 2: 12 * b**2, 3: -24 * b, 4: 24.0}
        return table.get(k, 0.0)

    return CostModel(
        dimension=2,
        evaluate=evaluate,
        minimizer=np.array([1.0, 1.0]),
        optimum=0.0,
        name="quartic2d",
        exact_partial=exact,
        kernel=("quartic2d",),
    )


@dataclass(frozen=True)
class AssumptionReport:
    """Empirical power-law sandwich and derivative-alignment constants.

    Over the sampled grid (minimizer excluded), with ``r = |x - x*|``:

    * ``alpha1 <= (J - J*) / r**degree <= alpha2``
    * ``beta1 <= sum_i d^(degree-1)J/dx_i^(degree-1) * (x_i - x*_i) / r**2``
    * ``sum_i |d^(degree-1)J/dx_i^(degree-1)| / r <= beta2``

    ``violations`` lists grid points where the ``beta1`` numerator is not
    positive (the alignment needed for convergence fails there).
    """

    degree: int
    box: tuple[tuple[float, float], ...]
    grid: int
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    violations: tuple[tuple[float, ...], ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_assumption(
    model: CostModel,
    degree: int,
    box: Sequence[tuple[float, float]],
    grid: int = 41,
) -> AssumptionReport:
    """Scan a box for the power-law sandwich and alignment constants."""
    if grid < 3:
        raise ValueError("grid must have at least 3 points per axis")
    box_t = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box_t) != model.dimension:
        raise ValueError("box dimension does not match the model")
    for lo, hi in box_t:
        if not hi > lo:
            raise ValueError("box must have positive extent on every axis")
    axes = [np.linspace(lo, hi, grid) for lo, hi in box_t]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    xs = model.minimizer
    a1 = math.inf
    a2 = -math.inf
    b1 = math.inf
    b2 = -math.inf
    violations: list[tuple[float, ...]] = []
    for pt in points:
        r2 = float(np.sum((pt - xs) ** 2))
        if r2 < 1e-24:
            continue
        r = math.sqrt(r2)
        jr = (model(pt) - model.optimum) / r**degree
        a1 = min(a1, jr)
        a2 = max(a2, jr)
        partials = [model.partial_derivative(i, degree - 1, pt) for i in range(model.dimension)]
        numer = sum(p * (pt[i] - xs[i]) for i, p in enumerate(partials))
        b1 = min(b1, numer / r2)
        b2 = max(b2, sum(abs(p) for p in partials) / r)
        if numer <= 0.0:
            violations.append(tuple(float(v) for v in pt))
    return AssumptionReport(
        degree=degree,
        box=box_t,
        grid=grid,
        alpha1=a1,
        alpha2=a2,
        beta1=b1,
        beta2=b2,
        violations=tuple(violations),
    )
