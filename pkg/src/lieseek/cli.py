"""Batch experiment runner.

Subcommands: ``simulate`` (integrate a run and fit its decay),
``certify`` (word-level excitation check for a design), ``resonance``
(frequency screen), ``fit`` (refit a saved trajectory CSV), and
``residual`` (one-period expansion-remainder order). Exit codes: 0
success, 1 check failure, 2 usage or configuration error, 3 unexpected
divergence. Every CSV artifact is deterministic for a fixed config.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .analysis import (
    DecayFit,
    envelope,
    envelope_points,
    fit_exponential,
    fit_polynomial,
    preferred_model,
    residual_order,
)
from .costs import (
    CostModel,
    VectorFieldPair,
    default_pair,
    gradient_pair,
    make_power_cost,
    make_quartic_2d,
    make_separable_cost,
)
from .dither import DitherSpec, check_nonresonance, design_dithers, design_multivariable
from .integrals import (
    DEFAULT_GRID_POINTS,
    IntegralRequest,
    certify_excitation,
    closed_form_I,
    iterated_integral,
)
from .simulate import (
    ESConfig,
    PRESET_NAMES,
    initial_speed,
    load_trajectory_csv,
    preset,
    simulate,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "save_config",
    "build_es_config",
    "main",
]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

#: envelope windows per horizon when the config does not fix a width
DEFAULT_ENVELOPE_WINDOWS = 200


class ConfigError(ValueError):
    """Configuration problem, annotated with the offending field path."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


_TOP_LEVEL_KEYS = {
    "preset",
    "cost",
    "pair",
    "design",
    "x0",
    "horizon",
    "steps_per_fast_period",
    "record_stride",
    "amplitude_scale",
    "expect_divergence",
    "analysis",
    "label",
}
_ANALYSIS_KEYS = {"window_width", "floor_quantile", "skip_initial"}
_COST_KEYS = {
    "power": {"name", "degree", "x_star", "normalized"},
    "separable": {"name", "degrees", "x_star", "normalized"},
    "quartic2d": {"name"},
}
_PAIR_KEYS = {"name", "sigma"}
_DESIGN_KEYS = {"order", "degree", "kappas", "epsilon", "split"}


@dataclass
class ExperimentConfig:
    """One experiment: a preset name, or a fully inline system.

    The two forms are mutually exclusive. ``horizon``,
    ``steps_per_fast_period`` and ``record_stride`` act as overrides on
    a preset and as the actual values for an inline system.
    """

    preset: str | None = None
    cost: dict[str, Any] | None = None
    pair: dict[str, Any] | None = None
    design: dict[str, Any] | None = None
    x0: list[float] | None = None
    horizon: float | None = None
    steps_per_fast_period: int | None = None
    record_stride: int | None = None
    amplitude_scale: float = 1.0
    expect_divergence: bool = False
    analysis: dict[str, Any] = field(default_factory=dict)
    label: str = ""

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("top level", "expected a mapping of fields")
        for key in raw:
            if key not in _TOP_LEVEL_KEYS:
                raise ConfigError(key, "unknown field")

        preset_name = raw.get("preset")
        inline_keys = [k for k in ("cost", "pair", "design", "x0") if raw.get(k) is not None]
        if preset_name is not None:
            if not isinstance(preset_name, str) or preset_name not in PRESET_NAMES:
                raise ConfigError(
                    "preset", f"expected one of {', '.join(PRESET_NAMES)}, got {preset_name!r}"
                )
            if inline_keys:
                raise ConfigError(
                    "preset", f"a preset excludes the inline fields ({', '.join(inline_keys)})"
                )
        else:
            for required in ("cost", "design", "x0"):
                if raw.get(required) is None:
                    raise ConfigError(required, "required when no preset is named")
            if raw.get("horizon") is None:
                raise ConfigError("horizon", "required when no preset is named")

        def _mapping(key: str) -> dict[str, Any] | None:
            value = raw.get(key)
            if value is None:
                return None
            if not isinstance(value, dict):
                raise ConfigError(key, "expected a mapping")
            return dict(value)

        analysis = _mapping("analysis") or {}
        for key in analysis:
            if key not in _ANALYSIS_KEYS:
                raise ConfigError(f"analysis.{key}", "unknown field")

        x0_raw = raw.get("x0")
        x0 = None
        if x0_raw is not None:
            if isinstance(x0_raw, (int, float)):
                x0_raw = [x0_raw]
            try:
                x0 = [float(v) for v in x0_raw]
            except (TypeError, ValueError):
                raise ConfigError("x0", "expected a number or a list of numbers") from None

        def _positive_number(key: str) -> float | None:
            value = raw.get(key)
            if value is None:
                return None
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigError(key, "expected a number") from None
            if not value > 0:
                raise ConfigError(key, "must be positive")
            return value

        def _positive_int(key: str) -> int | None:
            value = raw.get(key)
            if value is None:
                return None
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(key, "expected a positive integer")
            return value

        return cls(
            preset=preset_name,
            cost=_mapping("cost"),
            pair=_mapping("pair"),
            design=_mapping("design"),
            x0=x0,
            horizon=_positive_number("horizon"),
            steps_per_fast_period=_positive_int("steps_per_fast_period"),
            record_stride=_positive_int("record_stride"),
            amplitude_scale=float(raw.get("amplitude_scale", 1.0)),
            expect_divergence=bool(raw.get("expect_divergence", False)),
            analysis=analysis,
            label=str(raw.get("label", "")),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.preset is not None:
            out["preset"] = self.preset
        for key in ("cost", "pair", "design"):
            value = getattr(self, key)
            if value is not None:
                out[key] = dict(value)
        if self.x0 is not None:
            out["x0"] = [float(v) for v in self.x0]
        if self.horizon is not None:
            out["horizon"] = self.horizon
        if self.steps_per_fast_period is not None:
            out["steps_per_fast_period"] = self.steps_per_fast_period
        if self.record_stride is not None:
            out["record_stride"] = self.record_stride
        if self.amplitude_scale != 1.0:
            out["amplitude_scale"] = self.amplitude_scale
        if self.expect_divergence:
            out["expect_divergence"] = True
        if self.analysis:
            out["analysis"] = dict(self.analysis)
        if self.label:
            out["label"] = self.label
        return out


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a YAML experiment file, raising ConfigError with location."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(str(path), f"YAML error at {where}: {problem}") from None
    if raw is None:
        raise ConfigError(str(path), "empty config file")
    return ExperimentConfig.from_dict(raw)


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))


def _build_cost(spec: dict[str, Any]) -> CostModel:
    name = spec.get("name")
    if name not in _COST_KEYS:
        raise ConfigError("cost.name", f"expected one of {sorted(_COST_KEYS)}, got {name!r}")
    for key in spec:
        if key not in _COST_KEYS[name]:
            raise ConfigError(f"cost.{key}", f"unknown field for cost {name!r}")
    if name == "power":
        if "degree" not in spec:
            raise ConfigError("cost.degree", "required for a power cost")
        return make_power_cost(
            int(spec["degree"]),
            x_star=float(spec.get("x_star", 0.0)),
            normalized=bool(spec.get("normalized", True)),
        )
    if name == "separable":
        if "degrees" not in spec or "x_star" not in spec:
            raise ConfigError("cost", "separable needs degrees and x_star lists")
        return make_separable_cost(
            [int(d) for d in spec["degrees"]],
            [float(v) for v in spec["x_star"]],
            normalized=bool(spec.get("normalized", True)),
        )
    return make_quartic_2d()


def _build_pair(spec: dict[str, Any], offending: str = "pair") -> VectorFieldPair:
    for key in spec:
        if key not in _PAIR_KEYS:
            raise ConfigError(f"{offending}.{key}", "unknown field")
    name = spec.get("name", "default")
    if name == "default":
        return default_pair(float(spec.get("sigma", 1.0)))
    if name == "gradient":
        if "sigma" in spec and float(spec["sigma"]) != 1.0:
            raise ConfigError(f"{offending}.sigma", "the gradient pair has a fixed orientation")
        return gradient_pair()
    raise ConfigError(f"{offending}.name", f"expected 'default' or 'gradient', got {name!r}")


def _build_design(spec: dict[str, Any], model: CostModel) -> DitherSpec:
    for key in spec:
        if key not in _DESIGN_KEYS:
            raise ConfigError(f"design.{key}", "unknown field")
    if ("order" in spec) == ("degree" in spec):
        raise ConfigError("design", "give exactly one of order (bracket) or degree (cost)")
    order = int(spec["order"]) if "order" in spec else int(spec["degree"]) - 1
    if order < 1:
        raise ConfigError("design.order", "must be at least 1")
    if "epsilon" not in spec:
        raise ConfigError("design.epsilon", "required")
    epsilon = float(spec["epsilon"])
    kappas = spec.get("kappas", [1] * model.dimension)
    if isinstance(kappas, int):
        kappas = [kappas]
    kappas = [int(k) for k in kappas]
    if len(kappas) != model.dimension:
        raise ConfigError(
            "design.kappas", f"need {model.dimension} entries for this cost, got {len(kappas)}"
        )
    split = str(spec.get("split", "equal_magnitude"))
    try:
        if model.dimension == 1:
            return design_dithers(order, kappas[0], epsilon, split)
        return design_multivariable(order + 1, kappas, epsilon, split)
    except ValueError as exc:
        raise ConfigError("design", str(exc)) from None


def build_es_config(exp: ExperimentConfig) -> ESConfig:
    """Turn a parsed experiment description into a runnable ESConfig."""
    try:
        if exp.preset is not None:
            cfg = preset(
                exp.preset,
                steps_per_fast_period=exp.steps_per_fast_period,
                horizon=exp.horizon,
                record_stride=exp.record_stride,
            )
            if exp.amplitude_scale != 1.0:
                cfg = replace(cfg, amplitude_scale=exp.amplitude_scale)
            if exp.expect_divergence:
                cfg = replace(cfg, expect_divergence=True)
            if exp.label:
                cfg = replace(cfg, label=exp.label)
            return cfg
        model = _build_cost(exp.cost or {})
        pair = _build_pair(exp.pair or {})
        dithers = _build_design(exp.design or {}, model)
        return ESConfig(
            model=model,
            pair=pair,
            dithers=dithers,
            x0=tuple(exp.x0 or ()),
            horizon=float(exp.horizon or 0.0),
            steps_per_fast_period=exp.steps_per_fast_period or 64,
            record_stride=exp.record_stride,
            amplitude_scale=exp.amplitude_scale,
            expect_divergence=exp.expect_divergence,
            label=exp.label or "inline",
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None


def _resolve_experiment(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None and args.preset is not None:
        raise ConfigError("preset", "--preset and --config are mutually exclusive")
    if args.config is not None:
        exp = load_config(args.config)
    elif args.preset is not None:
        exp = ExperimentConfig(preset=args.preset)
    else:
        raise ConfigError("config", "one of --preset or --config is required")
    if args.horizon is not None:
        exp = replace(exp, horizon=args.horizon)
    if args.steps_per_period is not None:
        exp = replace(exp, steps_per_fast_period=args.steps_per_period)
    return exp


def _prepare_out(out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(str(out), f"cannot create output directory: {exc}") from None
    return out


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _fmt_vec(values: Sequence[float]) -> str:
    return "(" + ", ".join(_fmt(float(v)) for v in values) + ")"


def _write_envelope_csv(path: Path, env: np.ndarray) -> None:
    np.savetxt(path, env, fmt="%.17g", delimiter=",", header="t,e", comments="")


def _write_fits_csv(path: Path, fits: dict[str, DecayFit]) -> None:
    lines = ["kind,rate,prefactor,floor,r_squared,t_start,t_end,n_points"]
    for kind in sorted(fits):
        f = fits[kind]
        lines.append(
            f"{f.kind},{f.rate:.17g},{f.prefactor:.17g},{f.floor:.17g},"
            f"{f.r_squared:.17g},{f.window[0]:.17g},{f.window[1]:.17g},{f.n_points}"
        )
    path.write_text("\n".join(lines) + "\n")


def _write_plot(path: Path, env: np.ndarray, fits: dict[str, DecayFit]) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(env[:, 0], env[:, 1], lw=1.2, label="error envelope")
    for kind in sorted(fits):
        f = fits[kind]
        t = np.linspace(max(f.window[0], 1e-12), f.window[1], 400)
        if f.kind == "exponential":
            curve = f.prefactor * np.exp(-f.rate * t) + f.floor
        else:
            curve = f.prefactor * t**f.rate
        ax.semilogy(t, curve, "--", lw=1.0, label=f"{f.kind} fit (R^2 {f.r_squared:.3f})")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("|x - x*| envelope")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _fit_lines(fits: dict[str, DecayFit], rejects: dict[str, str]) -> list[str]:
    lines = []
    for kind in ("exponential", "polynomial"):
        if kind in fits:
            f = fits[kind]
            lines.append(
                f"{kind} fit: rate {_fmt(f.rate)}, prefactor {_fmt(f.prefactor)}, "
                f"floor {_fmt(f.floor)}, r2 {_fmt(f.r_squared)}, "
                f"window [{_fmt(f.window[0])}, {_fmt(f.window[1])}], points {f.n_points}"
            )
        elif kind in rejects:
            lines.append(f"{kind} fit: rejected ({rejects[kind]})")
    if len(fits) == 2:
        best = preferred_model(fits)
        other = "polynomial" if best == "exponential" else "exponential"
        lines.append(
            f"preferred model: {best} "
            f"(r2 {_fmt(fits[best].r_squared)} vs {_fmt(fits[other].r_squared)})"
        )
    return lines


def cmd_simulate(args: argparse.Namespace) -> int:
    exp = _resolve_experiment(args)
    cfg = build_es_config(exp)
    out = _prepare_out(args.out)
    traj = simulate(cfg)
    traj.to_csv(out / "trajectory.csv")

    window = exp.analysis.get("window_width")
    window = float(window) if window else max(cfg.epsilon, cfg.horizon / DEFAULT_ENVELOPE_WINDOWS)
    floor_quantile = float(exp.analysis.get("floor_quantile", 0.1))
    skip_initial = int(exp.analysis.get("skip_initial", 5))

    fits: dict[str, DecayFit] = {}
    rejects: dict[str, str] = {}
    env = None
    try:
        env = envelope(traj, cfg.model.minimizer, window)
    except ValueError as exc:
        rejects["envelope"] = str(exc)
    if env is not None:
        _write_envelope_csv(out / "envelope.csv", env)
        try:
            fits["exponential"] = fit_exponential(env, floor_quantile, skip_initial)
        except ValueError as exc:
            rejects["exponential"] = str(exc)
        try:
            fits["polynomial"] = fit_polynomial(env, skip_initial)
        except ValueError as exc:
            rejects["polynomial"] = str(exc)
        _write_fits_csv(out / "fits.csv", fits)
        if args.plot:
            _write_plot(out / "decay.svg", env, fits)

    err = np.linalg.norm(np.asarray(traj.final_state) - np.asarray(cfg.model.minimizer))
    lines = [
        f"run: {cfg.label or 'inline'}",
        f"cost: {cfg.model.name}, minimizer {_fmt_vec(cfg.model.minimizer)}",
        f"pair: {cfg.pair.name} (sigma {_fmt(cfg.pair.sigma)})",
        f"design: order {cfg.dithers.order}, kappas {tuple(cfg.dithers.kappas)}, "
        f"epsilon {_fmt(cfg.epsilon)}",
        f"x0: {_fmt_vec(cfg.x0)}",
        f"horizon: {_fmt(cfg.horizon)} s, rk4 step {_fmt(cfg.step_size)} s",
        f"initial speed: {_fmt(initial_speed(cfg))}",
        f"recorded samples: {len(traj.times)}",
    ]
    if traj.diverged:
        status = "expected" if cfg.expect_divergence else "UNEXPECTED"
        lines.append(
            f"diverged: yes ({status}) at step {traj.diverged_step}, "
            f"last t {_fmt(traj.final_time)}"
        )
    else:
        lines.append("diverged: no")
    lines.append(f"final t: {_fmt(traj.final_time)}")
    lines.append(f"final x: {_fmt_vec(traj.final_state)}")
    lines.append(f"final error: {_fmt(err)}")
    if env is not None:
        lines.append(f"envelope: {len(env)} points, window {_fmt(window)} s")
    else:
        lines.append(f"envelope: rejected ({rejects['envelope']})")
    lines.extend(_fit_lines(fits, rejects))

    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if traj.diverged and not cfg.expect_divergence:
        return EXIT_DIVERGED
    return EXIT_OK


def _word_label(word: Sequence[int]) -> str:
    return "".join(str(w) for w in word)


def cmd_certify(args: argparse.Namespace) -> int:
    if args.break_frequency and args.order < 2:
        raise ConfigError(
            "--break-frequency", "needs order >= 2 (at order 1 the design multiple is already 1)"
        )
    try:
        spec = design_dithers(args.order, args.kappa, args.epsilon)
        if args.break_frequency:
            ch1, ch2 = spec.pairs[0]
            detuned = replace(ch2, frequency_multiple=1)
            spec = DitherSpec(args.order, ((ch1, detuned),), args.epsilon)
        cert = certify_excitation(
            spec, max_len=args.max_len, grid_points=args.grid_points
        )
    except ValueError as exc:
        raise ConfigError("certify", str(exc)) from None

    ch1, ch2 = spec.pairs[0]
    channel_by_letter = {1: ch1, 2: ch2}
    rows = [
        (
            _word_label(c.word),
            c.kind,
            c.value,
            c.target,
            c.bound,
            c.ratio,
            c.passed,
        )
        for c in cert.checks
    ]
    closed_form_ok = True
    for k in range(args.order + 1):
        word = (1,) * k + (2,) + (1,) * (args.order - k)
        quad = iterated_integral(
            IntegralRequest(
                channels=tuple(channel_by_letter[w] for w in word),
                epsilon=args.epsilon,
                grid_points=args.grid_points,
            )
        )
        ref = closed_form_I(k, args.order, args.kappa, args.epsilon)
        ratio = abs(quad - ref) / abs(ref)
        ok = ratio <= 1e-5
        closed_form_ok = closed_form_ok and ok
        rows.append((_word_label(word), "closed-form", quad, ref, 1e-5, ratio, ok))

    out = _prepare_out(args.out)
    lines = ["word,kind,value,target,bound,ratio,passed"]
    for label, kind, value, target, bound, ratio, ok in rows:
        lines.append(
            f"{label},{kind},{value:.17g},{target:.17g},{bound:.17g},{ratio:.17g},{int(ok)}"
        )
    (out / "certification.csv").write_text("\n".join(lines) + "\n")

    passed = cert.passed and closed_form_ok
    print(
        f"design: order {args.order}, kappa {args.kappa}, epsilon {_fmt(args.epsilon)}"
        + (", channel 2 detuned to multiple 1" if args.break_frequency else "")
    )
    print(f"checks: {len(rows)} ({len(cert.checks)} words, {args.order + 1} closed-form)")
    if passed:
        print("certification PASSED")
        return EXIT_OK
    worst = max(rows, key=lambda r: r[5])
    print(
        f"certification FAILED: worst word {worst[0]} ({worst[1]}), "
        f"value {worst[2]:.6g}, target {worst[3]:.6g}, ratio {worst[5]:.3g}"
    )
    return EXIT_CHECK_FAILED


def cmd_resonance(args: argparse.Namespace) -> int:
    kappas = _parse_int_list(args.kappa, "--kappa")
    try:
        report = check_nonresonance(kappas, args.order, args.max_tuples)
    except ValueError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report.passes:
        print(
            f"non-resonance screen passed: kappas {tuple(kappas)}, order {args.order} "
            f"({report.tuples_checked} combinations checked)"
        )
        return EXIT_OK
    print(
        f"resonance found for kappas {tuple(kappas)} at order {args.order}; "
        f"witness (mu_i, nu_i) per coordinate: {report.witness}"
    )
    return EXIT_CHECK_FAILED


def cmd_fit(args: argparse.Namespace) -> int:
    try:
        times, states, _ = load_trajectory_csv(args.input)
    except OSError as exc:
        raise ConfigError(str(args.input), f"cannot read trajectory: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(args.input), str(exc)) from None
    x_star = _parse_float_list(args.x_star, "--x-star")
    if len(x_star) != states.shape[1]:
        raise ConfigError(
            "--x-star", f"trajectory has {states.shape[1]} coordinates, got {len(x_star)}"
        )
    span = float(times[-1] - times[0])
    window = args.window_width or span / DEFAULT_ENVELOPE_WINDOWS
    if not window > 0:
        raise ConfigError("--window-width", "must be positive")
    env = envelope_points(times, states, x_star, window)

    fits: dict[str, DecayFit] = {}
    rejects: dict[str, str] = {}
    try:
        fits["exponential"] = fit_exponential(env, args.floor_quantile, args.skip_initial)
    except ValueError as exc:
        rejects["exponential"] = str(exc)
    try:
        fits["polynomial"] = fit_polynomial(env, args.skip_initial)
    except ValueError as exc:
        rejects["polynomial"] = str(exc)

    out = _prepare_out(args.out)
    _write_fits_csv(out / "fits.csv", fits)
    print(f"input: {args.input}")
    print(f"envelope: {len(env)} points, window {_fmt(window)} s")
    for line in _fit_lines(fits, rejects):
        print(line)
    return EXIT_OK if fits else EXIT_CHECK_FAILED


def cmd_residual(args: argparse.Namespace) -> int:
    epsilons = _parse_float_list(args.epsilons, "--epsilons")
    if len(epsilons) < 2:
        raise ConfigError("--epsilons", "need at least two values")
    ordered = sorted(epsilons, reverse=True)
    for big, small in zip(ordered, ordered[1:]):
        if big < 4.0 * small:
            raise ConfigError("--epsilons", f"values {big} and {small} are closer than 4x")
    if args.degree < 2:
        raise ConfigError("--degree", "must be at least 2")
    model = make_power_cost(args.degree, x_star=args.x_star)
    spp = args.steps_per_period or 64
    try:
        configs = [
            ESConfig(
                model=model,
                pair=default_pair(),
                dithers=design_dithers(args.degree - 1, args.kappa, eps),
                x0=(args.x0,),
                horizon=eps,
                steps_per_fast_period=spp,
                label=f"residual-eps-{eps:g}",
            )
            for eps in ordered
        ]
    except ValueError as exc:
        raise ConfigError("residual", str(exc)) from None
    try:
        slope = residual_order(configs, (args.x0,))
    except ValueError as exc:
        print(f"residual order not measurable: {exc}")
        return EXIT_CHECK_FAILED
    theory = 1.0 + 1.0 / args.degree
    print(
        f"residual order estimate: {slope:.4f} over epsilons "
        f"{tuple(f'{e:g}' for e in ordered)} (theory {theory:.4g} for degree {args.degree})"
    )
    return EXIT_OK


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(flag, f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ConfigError(flag, "expected at least one value")
    return values


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(flag, f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(flag, "expected at least one value")
    return values


def _capped_order(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 5:
        raise argparse.ArgumentTypeError("certification is capped at orders 1..5")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    shared = common.add_argument_group("shared options")
    shared.add_argument("--config", type=Path, metavar="PATH", help="YAML experiment file")
    shared.add_argument("--preset", choices=PRESET_NAMES, help="named built-in experiment")
    shared.add_argument(
        "--out", type=Path, default=Path("."), metavar="DIR", help="artifact directory"
    )
    shared.add_argument(
        "--seed",
        type=int,
        default=None,
        metavar="U64",
        help="seed for randomized utilities (current subcommands are deterministic)",
    )
    shared.add_argument(
        "--steps-per-period",
        type=int,
        default=None,
        dest="steps_per_period",
        metavar="N",
        help="RK4 steps per fastest dither period",
    )
    shared.add_argument(
        "--horizon", type=float, default=None, metavar="SECONDS", help="integration horizon"
    )

    parser = argparse.ArgumentParser(
        prog="lieseek",
        description="Extremum-seeking experiment runner (simulate, certify, analyze).",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "simulate", parents=[common], help="integrate a seeking run and fit its decay"
    )
    p.add_argument("--plot", action="store_true", help="also render decay.svg")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "certify", parents=[common], help="verify a design excites exactly its target bracket"
    )
    p.add_argument("--order", type=_capped_order, required=True, metavar="N")
    p.add_argument("--kappa", type=int, default=1, metavar="K")
    p.add_argument("--epsilon", type=float, default=1.0, metavar="EPS")
    p.add_argument(
        "--grid-points", type=int, default=DEFAULT_GRID_POINTS, dest="grid_points", metavar="G"
    )
    p.add_argument("--max-len", type=int, default=None, dest="max_len", metavar="L")
    p.add_argument(
        "--break-frequency",
        action="store_true",
        dest="break_frequency",
        help="deliberately detune channel 2 to multiple 1 (failure-path test hook)",
    )
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("resonance", parents=[common], help="frequency non-resonance screen")
    p.add_argument("--kappa", required=True, metavar="K1,K2,...", help="comma-separated integers")
    p.add_argument("--order", type=int, required=True, metavar="N")
    p.add_argument("--max-tuples", type=int, default=10**8, dest="max_tuples", metavar="M")
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("fit", parents=[common], help="refit a saved trajectory CSV")
    p.add_argument("--input", type=Path, required=True, metavar="CSV")
    p.add_argument("--x-star", required=True, dest="x_star", metavar="V1,V2,...")
    p.add_argument(
        "--window-width", type=float, default=None, dest="window_width", metavar="SECONDS"
    )
    p.add_argument(
        "--floor-quantile", type=float, default=0.1, dest="floor_quantile", metavar="Q"
    )
    p.add_argument("--skip-initial", type=int, default=5, dest="skip_initial", metavar="K")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser(
        "residual", parents=[common], help="one-period expansion-remainder order"
    )
    p.add_argument("--degree", type=int, default=4, metavar="M")
    p.add_argument("--epsilons", default="1e-3,1e-4", metavar="E1,E2,...")
    p.add_argument("--x0", type=float, default=4.0, metavar="X")
    p.add_argument("--x-star", type=float, default=1.0, dest="x_star", metavar="XSTAR")
    p.add_argument("--kappa", type=int, default=1, metavar="K")
    p.set_defaults(func=cmd_residual)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
