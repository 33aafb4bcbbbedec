import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lieseek.analysis import (
    DecayFit,
    compare_fits,
    envelope,
    envelope_points,
    fit_exponential,
    fit_polynomial,
    preferred_model,
    residual_order,
)
from lieseek.costs import default_pair, make_power_cost
from lieseek.dither import design_dithers
from lieseek.simulate import ESConfig, simulate


def m4_config(eps, spp=64, x0=4.0, horizon=None, stride=None):
    return ESConfig(
        model=make_power_cost(4, x_star=1.0),
        pair=default_pair(),
        dithers=design_dithers(3, 1, eps),
        x0=(x0,),
        horizon=eps if horizon is None else horizon,
        steps_per_fast_period=spp,
        record_stride=stride,
    )


class TestEnvelope:
    def test_constant_error(self):
        cfg = m4_config(1e-3, horizon=1e-2)
        cfg = ESConfig(
            model=cfg.model,
            pair=cfg.pair,
            dithers=cfg.dithers,
            x0=cfg.x0,
            horizon=cfg.horizon,
            steps_per_fast_period=cfg.steps_per_fast_period,
            amplitude_scale=0.0,
        )
        env = envelope(simulate(cfg), x_star=[3.0], window_width=2e-3)
        np.testing.assert_allclose(env[:, 1], 1.0, rtol=1e-12)

    def test_window_must_cover_period(self):
        traj = simulate(m4_config(1e-3, horizon=5e-3))
        with pytest.raises(ValueError, match="window_width"):
            envelope(traj, [1.0], 5e-4)

    def test_bin_midpoints_and_maxima(self):
        times = np.linspace(0.0, 10.0, 1001)
        states = times[:, None]  # error grows linearly from x_star = 0
        env = envelope_points(times, states, [0.0], 1.0)
        assert env.shape == (11, 2)
        np.testing.assert_allclose(env[:, 0], np.arange(11) + 0.5)
        # per-bin max of err = t is the last sample in the bin
        np.testing.assert_allclose(env[:-1, 1], np.arange(1, 11), atol=0.011)

    def test_subsampled_trajectory_gives_close_envelope(self):
        dense = simulate(m4_config(1e-3, horizon=5e-2, stride=1))
        coarse = simulate(m4_config(1e-3, horizon=5e-2, stride=2))
        w = 1e-2
        e1 = envelope(dense, [1.0], w)
        e2 = envelope(coarse, [1.0], w)
        assert len(e1) == len(e2)
        assert np.all(e2[:, 1] <= e1[:, 1] + 1e-12)
        np.testing.assert_allclose(e2[:, 1], e1[:, 1], rtol=5e-2)

    def test_empty_and_bad_width_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            envelope_points(np.array([]), np.zeros((0, 1)), [0.0], 1.0)
        with pytest.raises(ValueError, match="positive"):
            envelope_points(np.array([0.0]), np.zeros((1, 1)), [0.0], 0.0)


def planted_env(t, e):
    return np.column_stack([t, e])


class TestFitExponential:
    def test_planted_decay_with_floor(self):
        t = np.linspace(0.05, 10.0, 300)
        env = planted_env(t, 3.0 * np.exp(-2.0 * t) + 0.01)
        fit = fit_exponential(env)
        assert fit.kind == "exponential"
        assert fit.rate == pytest.approx(2.0, rel=0.02)
        assert fit.prefactor == pytest.approx(3.0, rel=0.05)
        assert fit.floor == pytest.approx(0.01, abs=1e-3)
        assert fit.r_squared > 0.999
        assert fit.n_points >= 10

    @settings(max_examples=25, deadline=None)
    @given(
        rate=st.floats(0.5, 5.0),
        amp=st.floats(1.0, 10.0),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_recovers_rate_under_multiplicative_noise(self, rate, amp, seed):
        rng = np.random.default_rng(seed)
        t = np.linspace(0.0, 10.0 / rate, 200)
        noise = 1.0 + rng.uniform(-0.05, 0.05, size=t.shape)
        env = planted_env(t, amp * np.exp(-rate * t) * noise + 1e-3 * amp)
        fit = fit_exponential(env)
        assert fit.rate == pytest.approx(rate, rel=0.1)
        assert fit.prefactor == pytest.approx(amp, rel=0.2)
        assert fit.r_squared > 0.95

    def test_too_few_usable_points(self):
        t = np.linspace(0.0, 1.0, 30)
        env = planted_env(t, np.full_like(t, 0.5))
        with pytest.raises(ValueError, match="exponential fit needs"):
            fit_exponential(env)


class TestFitPolynomial:
    def test_planted_half_power(self):
        t = np.linspace(0.1, 50.0, 400)
        env = planted_env(t, 5.0 * t**-0.5)
        fit = fit_polynomial(env)
        assert fit.kind == "polynomial"
        assert fit.rate == pytest.approx(-0.5, abs=0.01)
        assert fit.prefactor == pytest.approx(5.0, rel=0.02)
        assert fit.floor == 0.0
        assert fit.r_squared > 0.999

    @settings(max_examples=25, deadline=None)
    @given(slope=st.floats(-2.0, -0.25))
    def test_noiseless_slope_exact(self, slope):
        t = np.linspace(0.2, 20.0, 200)
        fit = fit_polynomial(planted_env(t, 2.0 * t**slope))
        assert fit.rate == pytest.approx(slope, abs=1e-8)

    def test_too_few_points(self):
        t = np.linspace(0.1, 1.0, 8)
        with pytest.raises(ValueError, match="polynomial fit needs"):
            fit_polynomial(planted_env(t, t))


class TestModelSelection:
    def test_exponential_data_prefers_exponential(self):
        t = np.linspace(0.05, 10.0, 300)
        fits = compare_fits(planted_env(t, 3.0 * np.exp(-2.0 * t) + 0.01))
        assert set(fits) == {"exponential", "polynomial"}
        assert preferred_model(fits) == "exponential"

    def test_power_law_data_prefers_polynomial(self):
        t = np.linspace(0.1, 50.0, 400)
        fits = compare_fits(planted_env(t, 5.0 * t**-0.5))
        assert preferred_model(fits) == "polynomial"
        assert fits["polynomial"].r_squared > fits["exponential"].r_squared

    def test_preferred_model_ties_to_r_squared(self):
        mk = lambda kind, r2: DecayFit(kind, -1.0, 1.0, 0.0, r2, (0.0, 1.0), 10)
        assert preferred_model({"a": mk("a", 0.5), "b": mk("b", 0.9)}) == "b"


class TestResidualOrder:
    def test_degree_four_design_beats_linear_order(self):
        configs = [m4_config(1e-3), m4_config(1e-4)]
        slope = residual_order(configs, [4.0])
        assert 1.10 <= slope <= 1.6

    def test_order_jumps_at_the_minimizer(self):
        configs = [m4_config(1e-3, x0=1.0), m4_config(1e-4, x0=1.0)]
        slope = residual_order(configs, [1.0])
        assert 1.5 <= slope <= 3.0

    def test_first_order_design_on_quadratic(self):
        def cfg(eps):
            return ESConfig(
                model=make_power_cost(2, x_star=1.0),
                pair=default_pair(),
                dithers=design_dithers(1, 1, eps),
                x0=(4.0,),
                horizon=eps,
                steps_per_fast_period=64,
            )

        slope = residual_order([cfg(1e-3), cfg(1e-4)], [4.0])
        assert slope >= 1.35

    def test_requires_two_configs(self):
        with pytest.raises(ValueError, match="at least two"):
            residual_order([m4_config(1e-3)], [4.0])

    def test_requires_epsilon_separation(self):
        with pytest.raises(ValueError, match="separation"):
            residual_order([m4_config(1e-3), m4_config(5e-4)], [4.0])
