"""Fixed-step integration of the oscillatory seeking loop.

The right-hand side is ``dx_i/dt = g1(J(x)) u_1i(t) + g2(J(x)) u_2i(t)``
with sinusoidal inputs of period ``epsilon``. A classical fourth-order
Runge-Kutta scheme with the step tied to the fastest dither period keeps
the integration deterministic and phase-accurate; adaptive controllers
thrash on uniformly oscillatory dynamics.

Built-in cost kernels (separable powers, the coupled 2-D quartic) and
affine shaping pairs run through a compiled inner loop when numba is
available; anything else falls back to a plain Python loop with the same
semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .costs import (
    CostModel,
    VectorFieldPair,
    default_pair,
    gradient_pair,
    make_power_cost,
    make_quartic_2d,
)
from .dither import DitherSpec, design_dithers, design_multivariable

try:  # pragma: no cover - exercised implicitly by which loop runs
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


__all__ = [
    "ESConfig",
    "Trajectory",
    "simulate",
    "one_period_map",
    "preset",
    "PRESET_NAMES",
    "initial_speed",
    "load_trajectory_csv",
]

DIVERGENCE_LIMIT = 1e12
MAX_RECORDED_SAMPLES = 1_000_000

_COST_SEPARABLE = 0
_COST_QUARTIC2D = 1


@dataclass(frozen=True)
class ESConfig:
    """Everything one seeking run needs; immutable and reusable."""

    model: CostModel
    pair: VectorFieldPair
    dithers: DitherSpec
    x0: tuple[float, ...]
    horizon: float
    steps_per_fast_period: int = 64
    record_stride: int | None = None
    amplitude_scale: float = 1.0
    expect_divergence: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if self.steps_per_fast_period < 16:
            raise ValueError("steps_per_fast_period must be at least 16")
        if not self.horizon >= self.dithers.epsilon:
            raise ValueError("horizon must cover at least one dither period")
        if self.model.dimension != self.dithers.dimension or self.model.dimension != len(self.x0):
            raise ValueError(
                f"dimension mismatch: cost {self.model.dimension}, "
                f"dithers {self.dithers.dimension}, x0 {len(self.x0)}"
            )
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be positive")

    @property
    def epsilon(self) -> float:
        return self.dithers.epsilon

    @property
    def steps_per_base_period(self) -> int:
        """RK4 steps covering one full dither period epsilon."""
        return self.dithers.order * max(self.dithers.kappas) * self.steps_per_fast_period

    @property
    def step_size(self) -> float:
        return self.epsilon / self.steps_per_base_period

    def resolved_stride(self, n_steps: int) -> int:
        if self.record_stride is not None:
            return self.record_stride
        per = self.steps_per_base_period
        periods = max(1, n_steps // per)
        return per * max(1, math.ceil(periods / MAX_RECORDED_SAMPLES))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    costs: np.ndarray
    config: ESConfig
    diverged: bool = False
    diverged_step: int | None = None

    def __post_init__(self) -> None:
        if not (len(self.times) == len(self.states) == len(self.costs)):
            raise ValueError("times, states, costs must have equal length")
        if len(self.times) == 0:
            raise ValueError("a trajectory holds at least its initial sample")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def to_csv(self, path: str | Path) -> None:
        """Write `t,x_1,...,x_n,J` rows at full double precision."""
        n = self.states.shape[1]
        header = "t," + ",".join(f"x_{i + 1}" for i in range(n)) + ",J"
        data = np.column_stack([self.times, self.states, self.costs])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")


def load_trajectory_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a trajectory CSV back as (times, states, costs)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 3:
        raise ValueError("expected columns t, x_1..x_n, J")
    return data[:, 0], data[:, 1:-1], data[:, -1]


@njit(cache=True)
def _cost_value(code, x, exps, stars, scales):
    if code == _COST_QUARTIC2D:
        a = x[0] - 1.0
        b = x[0] - x[1]
        return a * a * a * a + b * b * b * b
    total = 0.0
    for i in range(x.shape[0]):
        d = x[i] - stars[i]
        p = 1.0
        for _ in range(exps[i]):
            p *= d
        total += scales[i] * p
    return total


@njit(cache=True)
def _rhs(t, x, out, eps, amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, code, exps, stars, scales):
    tau = t % eps
    j = _cost_value(code, x, exps, stars, scales)
    g1 = ga1 + gb1 * j
    g2 = ga2 + gb2 * j
    for i in range(x.shape[0]):
        th1 = w1[i] * tau
        th2 = w2[i] * tau
        u1 = amp1[i] * (math.cos(th1) if wf1[i] == 0 else math.sin(th1))
        u2 = amp2[i] * (math.cos(th2) if wf2[i] == 0 else math.sin(th2))
        out[i] = g1 * u1 + g2 * u2


@njit(cache=True)
def _rk4_loop(x0, h, n_steps, stride, eps, amp1, w1, wf1, amp2, w2, wf2,
              ga1, gb1, ga2, gb2, code, exps, stars, scales,
              rec_t, rec_x, rec_j):
    n = x0.shape[0]
    x = x0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    rec_t[0] = 0.0
    rec_x[0] = x
    rec_j[0] = _cost_value(code, x, exps, stars, scales)
    n_rec = 1
    diverged_step = -1
    last_recorded = 0
    for step in range(n_steps):
        t = step * h
        _rhs(t, x, k1, eps, amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, code, exps, stars, scales)
        for i in range(n):
            tmp[i] = x[i] + 0.5 * h * k1[i]
        _rhs(t + 0.5 * h, tmp, k2, eps, amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, code, exps, stars, scales)
        for i in range(n):
            tmp[i] = x[i] + 0.5 * h * k2[i]
        _rhs(t + 0.5 * h, tmp, k3, eps, amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, code, exps, stars, scales)
        for i in range(n):
            tmp[i] = x[i] + h * k3[i]
        _rhs(t + h, tmp, k4, eps, amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, code, exps, stars, scales)
        ok = True
        for i in range(n):
            x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not math.isfinite(x[i]) or abs(x[i]) > DIVERGENCE_LIMIT:
                ok = False
        if not ok:
            diverged_step = step + 1
            break
        if (step + 1) % stride == 0:
            rec_t[n_rec] = (step + 1) * h
            rec_x[n_rec] = x
            rec_j[n_rec] = _cost_value(code, x, exps, stars, scales)
            last_recorded = step + 1
            n_rec += 1
    if diverged_step < 0 and last_recorded != n_steps:
        rec_t[n_rec] = n_steps * h
        rec_x[n_rec] = x
        rec_j[n_rec] = _cost_value(code, x, exps, stars, scales)
        n_rec += 1
    return n_rec, diverged_step


def _kernel_arrays(cfg: ESConfig):
    """Flatten config into the arrays the compiled loop consumes."""
    n = cfg.model.dimension
    amp1 = np.empty(n)
    amp2 = np.empty(n)
    w1 = np.empty(n)
    w2 = np.empty(n)
    wf1 = np.empty(n, dtype=np.int64)
    wf2 = np.empty(n, dtype=np.int64)
    eps = cfg.epsilon
    for i, (ch1, ch2) in enumerate(cfg.dithers.pairs):
        amp1[i] = cfg.amplitude_scale * ch1.coefficient * eps ** (-ch1.exponent)
        amp2[i] = cfg.amplitude_scale * ch2.coefficient * eps ** (-ch2.exponent)
        w1[i] = 2.0 * math.pi * ch1.frequency_multiple * ch1.kappa / eps
        w2[i] = 2.0 * math.pi * ch2.frequency_multiple * ch2.kappa / eps
        wf1[i] = 0 if ch1.waveform == "cosine" else 1
        wf2[i] = 0 if ch2.waveform == "cosine" else 1
    ga1, gb1 = cfg.pair.g1_affine
    ga2, gb2 = cfg.pair.g2_affine
    kernel = cfg.model.kernel
    if kernel[0] == "separable":
        _, degrees, stars, scales = kernel
        return (amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, _COST_SEPARABLE,
                np.array(degrees, dtype=np.int64), np.array(stars, dtype=float),
                np.array(scales, dtype=float))
    if kernel[0] == "quartic2d":
        dummy = np.zeros(n, dtype=np.int64)
        return (amp1, w1, wf1, amp2, w2, wf2, ga1, gb1, ga2, gb2, _COST_QUARTIC2D,
                dummy, np.zeros(n), np.zeros(n))
    raise ValueError(f"unknown cost kernel {kernel[0]!r}")


def _has_fast_path(cfg: ESConfig) -> bool:
    return cfg.pair.is_affine and cfg.model.kernel is not None


def _run_python(cfg: ESConfig, x0: np.ndarray, n_steps: int, stride: int):
    """Generic RK4 loop for custom costs or non-affine pairs. Slow."""
    eps = cfg.epsilon
    model = cfg.model
    pair = cfg.pair
    chans = cfg.dithers.pairs
    scale = cfg.amplitude_scale

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        tau = t % eps
        j = model.evaluate(x)
        g1 = pair.g1(j)
        g2 = pair.g2(j)
        out = np.empty_like(x)
        for i, (ch1, ch2) in enumerate(chans):
            a1 = scale * ch1.coefficient * eps ** (-ch1.exponent)
            a2 = scale * ch2.coefficient * eps ** (-ch2.exponent)
            th1 = 2.0 * math.pi * ch1.frequency_multiple * ch1.kappa / eps * tau
            th2 = 2.0 * math.pi * ch2.frequency_multiple * ch2.kappa / eps * tau
            u1 = a1 * (math.cos(th1) if ch1.waveform == "cosine" else math.sin(th1))
            u2 = a2 * (math.cos(th2) if ch2.waveform == "cosine" else math.sin(th2))
            out[i] = g1 * u1 + g2 * u2
        return out

    h = cfg.step_size
    times = [0.0]
    states = [x0.copy()]
    costs = [model.evaluate(x0)]
    x = x0.copy()
    diverged_step = None
    last_recorded = 0
    for step in range(n_steps):
        t = step * h
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > DIVERGENCE_LIMIT):
            diverged_step = step + 1
            break
        if (step + 1) % stride == 0:
            times.append((step + 1) * h)
            states.append(x.copy())
            costs.append(model.evaluate(x))
            last_recorded = step + 1
    if diverged_step is None and last_recorded != n_steps:
        times.append(n_steps * h)
        states.append(x.copy())
        costs.append(model.evaluate(x))
    return (np.array(times), np.array(states), np.array(costs), diverged_step)


def simulate(cfg: ESConfig) -> Trajectory:
    """Integrate the seeking loop over [0, horizon].

    Records every ``record_stride``-th step (default: one sample per full
    dither period, thinned to at most a million samples) plus the initial
    and final states. A non-finite or magnitude-exceeding state truncates
    the run and sets the divergence flag instead of raising.
    """
    h = cfg.step_size
    n_steps = max(1, int(round(cfg.horizon / h)))
    stride = cfg.resolved_stride(n_steps)
    x0 = np.array(cfg.x0, dtype=float)
    if _has_fast_path(cfg):
        args = _kernel_arrays(cfg)
        n_rec_max = n_steps // stride + 2
        rec_t = np.empty(n_rec_max)
        rec_x = np.empty((n_rec_max, len(x0)))
        rec_j = np.empty(n_rec_max)
        n_rec, diverged_step = _rk4_loop(
            x0, h, n_steps, stride, cfg.epsilon, *args, rec_t, rec_x, rec_j
        )
        return Trajectory(
            times=rec_t[:n_rec].copy(),
            states=rec_x[:n_rec].copy(),
            costs=rec_j[:n_rec].copy(),
            config=cfg,
            diverged=diverged_step >= 0,
            diverged_step=int(diverged_step) if diverged_step >= 0 else None,
        )
    times, states, costs, diverged_step = _run_python(cfg, x0, n_steps, stride)
    return Trajectory(
        times=times,
        states=states,
        costs=costs,
        config=cfg,
        diverged=diverged_step is not None,
        diverged_step=diverged_step,
    )


def one_period_map(cfg: ESConfig, x0: Sequence[float] | None = None) -> np.ndarray:
    """State after integrating exactly one dither period from ``x0``."""
    start = tuple(float(v) for v in (cfg.x0 if x0 is None else x0))
    per = cfg.steps_per_base_period
    cfg1 = replace(cfg, x0=start, horizon=cfg.epsilon, record_stride=per)
    traj = simulate(cfg1)
    if traj.diverged:
        raise RuntimeError("state diverged within a single dither period")
    return traj.final_state


def initial_speed(cfg: ESConfig) -> float:
    """Norm of dx/dt at t=0, x=x0 (dithers evaluated at phase zero)."""
    x0 = np.array(cfg.x0, dtype=float)
    j = cfg.model.evaluate(x0)
    g1 = cfg.pair.g1(j)
    g2 = cfg.pair.g2(j)
    eps = cfg.epsilon
    out = np.empty_like(x0)
    for i, (ch1, ch2) in enumerate(cfg.dithers.pairs):
        u1 = cfg.amplitude_scale * ch1.coefficient * eps ** (-ch1.exponent) * (
            1.0 if ch1.waveform == "cosine" else 0.0
        )
        u2 = cfg.amplitude_scale * ch2.coefficient * eps ** (-ch2.exponent) * (
            1.0 if ch2.waveform == "cosine" else 0.0
        )
        out[i] = g1 * u1 + g2 * u2
    return float(np.linalg.norm(out))


def _preset_power(degree: int, epsilon: float, spp: int, horizon: float, x0: float, name: str) -> ESConfig:
    return ESConfig(
        model=make_power_cost(degree, x_star=1.0),
        pair=default_pair(1.0),
        dithers=design_dithers(degree - 1, kappa=1, epsilon=epsilon),
        x0=(x0,),
        horizon=horizon,
        steps_per_fast_period=spp,
        label=name,
    )


def _preset_gradient(degree: int, epsilon: float, name: str) -> ESConfig:
    return ESConfig(
        model=make_power_cost(degree, x_star=1.0),
        pair=gradient_pair(),
        dithers=design_dithers(1, kappa=1, epsilon=epsilon),
        x0=(4.0,),
        horizon=60.0,
        steps_per_fast_period=64,
        label=name,
    )


def _build_preset(name: str) -> ESConfig:
    if name == "m4":
        return _preset_power(4, 1e-3, 64, 5.0, 4.0, name)
    if name == "m6":
        return _preset_power(6, 1e-4, 64, 5.0, 4.0, name)
    if name == "m8":
        return _preset_power(8, 1e-6, 32, 5.0, 4.0, name)
    if name == "gradient_m4":
        return _preset_gradient(4, 1e-3, name)
    if name == "gradient_m6":
        return _preset_gradient(6, 1e-4, name)
    if name == "mv4":
        return ESConfig(
            model=make_quartic_2d(),
            pair=default_pair(1.0),
            dithers=design_multivariable(4, kappas=(1, 4), epsilon=1e-3),
            x0=(0.0, 0.0),
            horizon=10.0,
            steps_per_fast_period=64,
            label=name,
        )
    if name == "limitation":
        cfg = _preset_power(4, 1e-4, 64, 1.0, 5.0, name)
        return replace(cfg, expect_divergence=True)
    raise ValueError(f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}")


PRESET_NAMES = ("m4", "m6", "m8", "gradient_m4", "gradient_m6", "mv4", "limitation")


def preset(
    name: str,
    steps_per_fast_period: int | None = None,
    horizon: float | None = None,
    record_stride: int | None = None,
) -> ESConfig:
    """Named experiment configuration, optionally with overridden knobs.

    ``m4``/``m6``/``m8`` run the high-order design on the flat power cost
    of that degree (epsilon 1e-3 / 1e-4 / 1e-6, start 4). The gradient
    presets run the first-order baseline over 60 s. ``mv4`` runs the
    coupled 2-D quartic with frequency multipliers (1, 4). ``limitation``
    starts the degree-4 problem far out at 5 with epsilon 1e-4, where the
    initial velocity is around 1e4 and divergence is tolerated.
    """
    cfg = _build_preset(name)
    if steps_per_fast_period is not None:
        cfg = replace(cfg, steps_per_fast_period=steps_per_fast_period)
    if horizon is not None:
        cfg = replace(cfg, horizon=horizon)
    if record_stride is not None:
        cfg = replace(cfg, record_stride=record_stride)
    return cfg
