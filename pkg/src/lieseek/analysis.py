"""Convergence quantification: envelopes, decay-law fits, residual order.

Raw trajectories oscillate at the dither period around an averaged decay,
so every fit here works on the windowed envelope of the tracking error
rather than on raw samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .simulate import ESConfig, Trajectory, one_period_map

__all__ = [
    "DecayFit",
    "envelope",
    "envelope_points",
    "fit_exponential",
    "fit_polynomial",
    "compare_fits",
    "preferred_model",
    "residual_order",
]

FLOOR_QUANTILE = 0.1
TAIL_FRACTION = 0.2
SKIP_INITIAL = 5
FLOOR_EXCLUSION_FACTOR = 3.0
MIN_FIT_POINTS = 10


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay law for an error envelope.

    ``kind`` is "exponential" (envelope ~ prefactor * exp(-rate * t) +
    floor) or "polynomial" (log envelope ~ log prefactor + rate * log t;
    rate is the log-log slope, negative for decay).
    """

    kind: str
    rate: float
    prefactor: float
    floor: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


def envelope(traj: Trajectory, x_star: Sequence[float], window_width: float) -> np.ndarray:
    """Windowed maxima of the tracking error, as rows (t_mid, max error).

    ``window_width`` must cover at least one dither period, otherwise the
    maxima would alias the oscillation instead of bounding it.
    """
    eps = traj.config.dithers.epsilon
    if window_width < eps:
        raise ValueError(f"window_width must be >= the dither period {eps}")
    return envelope_points(traj.times, traj.states, x_star, window_width)


def envelope_points(
    times: np.ndarray,
    states: np.ndarray,
    x_star: Sequence[float],
    window_width: float,
) -> np.ndarray:
    """Array-level envelope, for trajectories loaded from CSV.

    The caller is responsible for choosing ``window_width`` wider than
    the dither period; nothing here can check that.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    if not window_width > 0:
        raise ValueError("window_width must be positive")
    target = np.atleast_1d(np.asarray(x_star, dtype=float))
    err = np.linalg.norm(states - target[None, :], axis=1)
    idx = np.minimum(
        (times / window_width).astype(int),
        max(0, int(times[-1] / window_width)),
    )
    n_bins = int(idx.max()) + 1
    maxima = np.zeros(n_bins)
    counts = np.zeros(n_bins, dtype=int)
    np.maximum.at(maxima, idx, err)
    np.add.at(counts, idx, 1)
    filled = counts > 0
    mids = (np.arange(n_bins) + 0.5) * window_width
    return np.column_stack([mids[filled], maxima[filled]])


def preferred_model(fits: dict[str, DecayFit]) -> str:
    """Name of the better-R^2 fit among the compared decay laws."""
    return max(fits, key=lambda kind: fits[kind].r_squared)


def _least_squares_line(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept, and R^2 of y against t."""
    design = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - (slope * t + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r_squared


def _usable_mask(e: np.ndarray, floor: float, skip_initial: int) -> np.ndarray:
    mask = np.ones(len(e), dtype=bool)
    mask[: min(skip_initial, len(e))] = False
    mask &= e > FLOOR_EXCLUSION_FACTOR * floor
    mask &= e - floor > 0
    return mask


def fit_exponential(
    env: np.ndarray,
    floor_quantile: float = FLOOR_QUANTILE,
    skip_initial: int = SKIP_INITIAL,
) -> DecayFit:
    """Fit envelope ~ prefactor * exp(-rate * t) + floor.

    The floor is the ``floor_quantile`` quantile of the envelope tail
    (last fifth); fitting then runs on log(envelope - floor) over points
    past the initial transient and clear of the floor.
    """
    env = np.asarray(env, dtype=float)
    t, e = env[:, 0], env[:, 1]
    tail = e[-max(1, int(math.ceil(TAIL_FRACTION * len(e)))):]
    floor = float(np.quantile(tail, floor_quantile))
    mask = _usable_mask(e, floor, skip_initial)
    if mask.sum() < MIN_FIT_POINTS:
        raise ValueError(
            f"exponential fit needs >= {MIN_FIT_POINTS} envelope points above the floor "
            f"(floor {floor:.3g}, usable {int(mask.sum())} of {len(e)})"
        )
    ts, es = t[mask], e[mask]
    slope, intercept, r_squared = _least_squares_line(ts, np.log(es - floor))
    return DecayFit(
        kind="exponential",
        rate=-slope,
        prefactor=math.exp(intercept),
        floor=floor,
        r_squared=r_squared,
        window=(float(ts[0]), float(ts[-1])),
        n_points=int(mask.sum()),
    )


def fit_polynomial(env: np.ndarray, skip_initial: int = SKIP_INITIAL) -> DecayFit:
    """Fit log envelope ~ log prefactor + rate * log t (rate < 0 decays).

    No floor is subtracted; on a power cost of degree m the first-order
    baseline's theoretical slope is -1/(m-2).
    """
    env = np.asarray(env, dtype=float)
    t, e = env[:, 0], env[:, 1]
    mask = np.ones(len(e), dtype=bool)
    mask[: min(skip_initial, len(e))] = False
    mask &= (t > 0) & (e > 0)
    if mask.sum() < MIN_FIT_POINTS:
        raise ValueError(
            f"polynomial fit needs >= {MIN_FIT_POINTS} positive envelope points, "
            f"got {int(mask.sum())}"
        )
    ts, es = t[mask], e[mask]
    slope, intercept, r_squared = _least_squares_line(np.log(ts), np.log(es))
    return DecayFit(
        kind="polynomial",
        rate=slope,
        prefactor=math.exp(intercept),
        floor=0.0,
        r_squared=r_squared,
        window=(float(ts[0]), float(ts[-1])),
        n_points=int(mask.sum()),
    )


def compare_fits(
    env: np.ndarray,
    floor_quantile: float = FLOOR_QUANTILE,
    skip_initial: int = SKIP_INITIAL,
) -> dict[str, DecayFit]:
    """Both decay fits on the same envelope, keyed by kind."""
    return {
        "exponential": fit_exponential(env, floor_quantile, skip_initial),
        "polynomial": fit_polynomial(env, skip_initial),
    }


def _drift_target(cfg: ESConfig, x0: np.ndarray) -> np.ndarray:
    """Leading one-period drift: -sigma * per-coordinate pure derivative."""
    order = cfg.dithers.order
    return np.array(
        [
            -cfg.pair.sigma * cfg.model.partial_derivative(i, order, x0)
            for i in range(cfg.model.dimension)
        ]
    )


def residual_order(configs: Sequence[ESConfig], x0: Sequence[float]) -> float:
    """Log-log slope of the one-period expansion remainder across epsilons.

    For each config, the remainder is |x(eps) - x0 - eps * drift| with the
    drift from the bracket identity. Epsilon values must be separated by
    at least 4x, and every remainder must sit at least 10x above a
    step-halving estimate of the integrator error, otherwise the order is
    not measurable and a ValueError explains which epsilon failed.
    """
    if len(configs) < 2:
        raise ValueError("need at least two epsilon values")
    start = np.array([float(v) for v in x0])
    by_eps = sorted(configs, key=lambda c: c.epsilon, reverse=True)
    for bigger, smaller in zip(by_eps, by_eps[1:]):
        if bigger.epsilon < 4.0 * smaller.epsilon:
            raise ValueError(
                f"epsilon values too close: {bigger.epsilon:g} vs {smaller.epsilon:g} "
                "(need >= 4x separation)"
            )
    log_eps = []
    log_delta = []
    for cfg in by_eps:
        eps = cfg.epsilon
        mapped = one_period_map(cfg, start)
        delta = float(np.linalg.norm(mapped - start - eps * _drift_target(cfg, start)))
        finer = replace(cfg, steps_per_fast_period=2 * cfg.steps_per_fast_period)
        integrator_err = float(np.linalg.norm(one_period_map(finer, start) - mapped))
        if delta <= 10.0 * integrator_err:
            raise ValueError(
                f"remainder {delta:.3g} at epsilon={eps:g} is within 10x of the "
                f"integrator error estimate {integrator_err:.3g}; order not measurable"
            )
        log_eps.append(math.log(eps))
        log_delta.append(math.log(delta))
    slope, _, _ = _least_squares_line(np.array(log_eps), np.array(log_delta))
    return slope
