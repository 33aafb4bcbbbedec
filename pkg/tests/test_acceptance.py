"""End-to-end acceptance runs, one per advertised guarantee.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see
them on success).  The final high-degree run integrates five million
dither periods and dominates the suite's wall time; everything else
finishes in seconds.
"""

import time

import numpy as np

from lieseek.analysis import compare_fits, envelope, fit_polynomial, residual_order
from lieseek.brackets import ad_bracket, ad_bracket_recursive
from lieseek.costs import default_pair, make_power_cost, make_quartic_2d, verify_assumption
from lieseek.dither import check_nonresonance, design_dithers
from lieseek.integrals import IntegralRequest, certify_excitation, closed_form_I, iterated_integral
from lieseek.simulate import ESConfig, initial_speed, preset, simulate


def _report(num: str, name: str, ok: bool, detail: str, t0: float) -> None:
    elapsed = time.perf_counter() - t0
    line = f"ACCEPTANCE {num:>3} {name}: {'PASS' if ok else 'FAIL'} ({detail}) [{elapsed:.1f}s]"
    print(line)
    assert ok, line


def test_01_closed_form_integrals():
    t0 = time.perf_counter()
    worst = 0.0
    checks = 0
    for order in (1, 2, 3):
        for kappa in (1, 2):
            ch1, ch2 = design_dithers(order, kappa, 1.0).pairs[0]
            by_letter = {1: ch1, 2: ch2}
            for k in range(order + 1):
                word = (1,) * k + (2,) + (1,) * (order - k)
                quad = iterated_integral(
                    IntegralRequest(
                        channels=tuple(by_letter[w] for w in word),
                        epsilon=1.0,
                        grid_points=200_000,
                    )
                )
                ref = closed_form_I(k, order, kappa, 1.0)
                worst = max(worst, abs(quad - ref) / abs(ref))
                checks += 1
    _report(
        "1", "iterated integrals match closed form",
        worst <= 1e-5, f"{checks} integrals, worst rel {worst:.2e}", t0,
    )


def test_02_excitation_certificates():
    t0 = time.perf_counter()
    worst = 0.0
    n_checks = 0
    all_passed = True
    for order in (1, 2, 3):
        cert = certify_excitation(design_dithers(order, 1, 1.0))
        all_passed = all_passed and cert.passed
        n_checks += len(cert.checks)
        worst = max(worst, max(c.ratio for c in cert.checks))
    _report(
        "2", "designs certify at orders 1..3",
        all_passed, f"{n_checks} word checks, worst ratio {worst:.2e}", t0,
    )


def test_03_bracket_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    points = rng.uniform(-2.5, 2.5, size=50)
    worst_identity = 0.0
    worst_recursive = 0.0
    checks = 0

    def gap(lhs: float, rhs: float) -> float:
        if abs(rhs) > 1e-9:
            return abs(lhs - rhs) / abs(rhs)
        return abs(lhs) * 1e-2  # absolute check, scaled into the shared budget

    for degree in range(2, 8):
        model = make_power_cost(degree)
        for sigma in (1.0, 2.0):
            pair = default_pair(sigma)
            for order in range(1, 6):
                for x in points:
                    target = -sigma * model.partial_derivative(0, order, np.array([x]))
                    direct = ad_bracket(order, pair, model, float(x))
                    nested = ad_bracket_recursive(order, pair, model, float(x))
                    worst_identity = max(worst_identity, gap(direct, target))
                    worst_recursive = max(worst_recursive, gap(nested, direct))
                    checks += 1
    ok = worst_identity <= 1e-8 and worst_recursive <= 1e-8
    _report(
        "3", "iterated bracket equals the pure derivative",
        ok, f"{checks} points, worst rel {worst_identity:.2e}, recursion gap {worst_recursive:.2e}",
        t0,
    )


def test_04_flat_bottom_quartic_converges_exponentially():
    t0 = time.perf_counter()
    cfg = preset("m4")
    traj = simulate(cfg)
    err = abs(traj.final_state[0] - 1.0)
    env = envelope(traj, [1.0], cfg.horizon / 200)
    fits = compare_fits(env)
    exp, poly = fits["exponential"], fits["polynomial"]
    ok = (
        err < 0.05
        and exp.rate > 0
        and exp.r_squared >= 0.9
        and exp.r_squared > poly.r_squared
    )
    _report(
        "4", "degree-4 run settles exponentially",
        ok,
        f"final err {err:.4f}, rate {exp.rate:.3f}, R2 {exp.r_squared:.3f} vs {poly.r_squared:.3f}",
        t0,
    )


def test_05_gradient_baseline_stalls():
    t0 = time.perf_counter()
    cfg = preset("gradient_m4")
    traj = simulate(cfg)
    err = abs(traj.final_state[0] - 1.0)
    env = envelope(traj, [1.0], cfg.horizon / 200)
    late = fit_polynomial(env[len(env) // 2:], skip_initial=0)
    ok = err > 0.05 and -0.7 <= late.rate <= -0.3
    _report(
        "5", "first-order design crawls on the flat bottom",
        ok, f"err at t=60 {err:.4f}, late log-log slope {late.rate:.3f}", t0,
    )


def test_06_degree_six_converges():
    t0 = time.perf_counter()
    cfg = preset("m6")
    traj = simulate(cfg)
    err = abs(traj.final_state[0] - 1.0)
    env = envelope(traj, [1.0], cfg.horizon / 200)
    exp = compare_fits(env)["exponential"]
    ok = err < 0.05 and exp.rate > 0
    _report(
        "6a", "degree-6 run settles exponentially",
        ok, f"final err {err:.4f}, rate {exp.rate:.3f}", t0,
    )


def test_07_multivariable_run_and_frequency_screen():
    t0 = time.perf_counter()
    cfg = preset("mv4")
    traj = simulate(cfg)
    err = float(np.max(np.abs(traj.final_state - np.asarray(cfg.model.minimizer))))
    good = check_nonresonance((1, 4), 3)
    bad = check_nonresonance((1, 1), 3)
    ok = err < 0.05 and good.passes and (not bad.passes) and bad.witness is not None
    _report(
        "7", "coupled 2-D run converges and the screen separates (1,4) from (1,1)",
        ok, f"max coord err {err:.4f}, witness {bad.witness}", t0,
    )


def test_08_expansion_remainder_order():
    t0 = time.perf_counter()

    def cfg(eps: float) -> ESConfig:
        return ESConfig(
            model=make_power_cost(4, x_star=1.0),
            pair=default_pair(),
            dithers=design_dithers(3, 1, eps),
            x0=(4.0,),
            horizon=eps,
            steps_per_fast_period=64,
        )

    slope = residual_order([cfg(1e-3), cfg(1e-4)], [4.0])
    _report(
        "8", "one-period remainder decays faster than linearly",
        slope >= 1.10, f"log-log slope {slope:.4f}", t0,
    )


def test_09_amplitude_cost_of_small_epsilon():
    t0 = time.perf_counter()
    cfg = preset("limitation")
    speed = initial_speed(cfg)
    traj = simulate(cfg)
    finite = bool(np.all(np.isfinite(traj.states)))
    ok = 0.5e4 <= speed <= 2e4 and finite
    _report(
        "9", "shrinking epsilon inflates the commanded speed",
        ok, f"initial speed {speed:.1f}, final x {traj.final_state[0]:.3f}", t0,
    )


def test_10_curvature_bounds_on_the_coupled_quartic():
    t0 = time.perf_counter()
    report = verify_assumption(
        make_quartic_2d(), 4, ((-1.0, 3.0), (-1.0, 3.0)), grid=41
    )
    ok = report.ok and report.alpha2 <= 5.0 and report.beta1 >= 8.0
    _report(
        "10", "quartic coupling satisfies the declared growth bounds",
        ok, f"alpha2 {report.alpha2:.3f}, beta1 {report.beta1:.3f}", t0,
    )


def test_06b_degree_eight_converges():
    # five million periods at epsilon = 1e-6; this is the long run
    t0 = time.perf_counter()
    cfg = preset("m8")
    traj = simulate(cfg)
    err = abs(traj.final_state[0] - 1.0)
    _report(
        "6b", "degree-8 run reaches the minimizer",
        err < 0.1, f"final err {err:.4f}", t0,
    )
