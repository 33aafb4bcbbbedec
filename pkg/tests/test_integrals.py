import math

import pytest

from lieseek.dither import DitherSpec, design_dithers
from lieseek.integrals import (
    IntegralRequest,
    certify_excitation,
    closed_form_I,
    iterated_integral,
)


def detune(spec: DitherSpec) -> DitherSpec:
    """Clone a single-pair design with channel 2 dropped to multiple 1."""
    from dataclasses import replace

    ch1, ch2 = spec.pairs[0]
    return DitherSpec(spec.order, ((ch1, replace(ch2, frequency_multiple=1)),), spec.epsilon)


class TestClosedForm:
    # hand-evaluated from eps^(N+1) (-1)^(floor(N/2)+k) / ((4 pi kappa)^N k! (N-k)!)
    @pytest.mark.parametrize(
        "k, order, expected",
        [
            (0, 1, 0.07957747154594767),
            (1, 1, -0.07957747154594767),
            (1, 2, 0.006332573977646111),
            (2, 2, -0.0031662869888230555),
            (0, 3, -8.398837091979035e-05),
        ],
    )
    def test_frozen_values(self, k, order, expected):
        assert closed_form_I(k, order) == pytest.approx(expected, rel=1e-14)

    def test_epsilon_and_kappa_scaling(self):
        base = closed_form_I(1, 3, kappa=1, epsilon=1.0)
        assert closed_form_I(1, 3, kappa=2, epsilon=1.0) == pytest.approx(base / 8.0)
        assert closed_form_I(1, 3, kappa=1, epsilon=0.5) == pytest.approx(base * 0.5**4)

    def test_k_range_enforced(self):
        with pytest.raises(ValueError):
            closed_form_I(-1, 2)
        with pytest.raises(ValueError):
            closed_form_I(3, 2)
        with pytest.raises(ValueError):
            closed_form_I(0, 0)


class TestIteratedIntegral:
    def test_order_one_pair_both_orderings(self):
        ch1, ch2 = design_dithers(1).pairs[0]
        inner_first = iterated_integral(IntegralRequest((ch2, ch1), 1.0))
        outer_first = iterated_integral(IntegralRequest((ch1, ch2), 1.0))
        assert inner_first == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-6)
        assert outer_first == pytest.approx(-1.0 / (4.0 * math.pi), rel=1e-6)

    def test_single_channel_has_zero_mean(self):
        for ch in design_dithers(3).pairs[0]:
            assert iterated_integral(IntegralRequest((ch,), 1.0)) == pytest.approx(0.0, abs=1e-9)

    def test_order_two_middle_word(self):
        ch1, ch2 = design_dithers(2).pairs[0]
        got = iterated_integral(IntegralRequest((ch1, ch2, ch1), 1.0))
        assert got == pytest.approx(1.0 / (16.0 * math.pi**2), rel=1e-6)

    @pytest.mark.parametrize("eps", [0.5, 2.0])
    def test_epsilon_power_scaling(self, eps):
        # unit-amplitude integrals scale exactly as eps^length
        ch1, ch2 = design_dithers(1).pairs[0]
        at_one = iterated_integral(IntegralRequest((ch2, ch1), 1.0))
        scaled = iterated_integral(IntegralRequest((ch2, ch1), eps))
        assert scaled == pytest.approx(at_one * eps**2, rel=1e-5)

    def test_grid_doubling_shrinks_error(self):
        ch1, ch2 = design_dithers(2).pairs[0]
        exact = closed_form_I(1, 2)
        coarse = abs(iterated_integral(IntegralRequest((ch1, ch2, ch1), 1.0, 2000)) - exact)
        fine = abs(iterated_integral(IntegralRequest((ch1, ch2, ch1), 1.0, 4000)) - exact)
        assert coarse / fine >= 3.5

    def test_request_validation(self):
        ch = design_dithers(1).pairs[0][0]
        with pytest.raises(ValueError):
            IntegralRequest((), 1.0)
        with pytest.raises(ValueError):
            IntegralRequest((ch,), 0.0)
        with pytest.raises(ValueError):
            IntegralRequest((ch,), 1.0, grid_points=999)


class TestCertifyExcitation:
    @pytest.mark.parametrize("order, n_checks", [(1, 6), (2, 14), (3, 30)])
    def test_designed_specs_certify(self, order, n_checks):
        cert = certify_excitation(design_dithers(order))
        assert cert.passed
        assert len(cert.checks) == n_checks
        assert not cert.failures
        kinds = {c.kind for c in cert.checks}
        assert kinds == {"vanish", "collapse"}

    def test_collapse_targets_are_signed_binomials(self):
        cert = certify_excitation(design_dithers(2))
        collapse = {c.word: c.target for c in cert.checks if c.kind == "collapse"}
        assert collapse == {
            (2, 1, 1): pytest.approx(1.0),
            (1, 2, 1): pytest.approx(-2.0),
            (1, 1, 2): pytest.approx(1.0),
        }

    def test_small_epsilon_design_certifies(self):
        cert = certify_excitation(design_dithers(2, epsilon=1e-3))
        assert cert.passed

    def test_detuned_spec_fails_on_short_word(self):
        cert = certify_excitation(detune(design_dithers(3)))
        assert not cert.passed
        lengths = {len(c.word) for c in cert.failures}
        assert 2 in lengths
        assert cert.worst is not None
        assert not cert.worst.passed

    def test_impossible_tolerance_reports_failures(self):
        cert = certify_excitation(design_dithers(1), tol_vanish=1e-18)
        assert not cert.passed
        assert cert.failures

    def test_multi_pair_spec_rejected(self):
        from lieseek.dither import design_multivariable

        with pytest.raises(ValueError, match="single-pair"):
            certify_excitation(design_multivariable(4, (1, 4)))

    def test_max_len_bounds(self):
        spec = design_dithers(3)
        with pytest.raises(ValueError):
            certify_excitation(spec, max_len=3)
        with pytest.raises(ValueError):
            certify_excitation(spec, max_len=7)
