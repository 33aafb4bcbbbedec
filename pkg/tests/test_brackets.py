import pytest
from hypothesis import given, settings, strategies as st

from lieseek.brackets import (
    ad_bracket,
    ad_bracket_recursive,
    lie_bracket,
    lie_derivative_word,
)
from lieseek.costs import (
    VectorFieldPair,
    default_pair,
    gradient_pair,
    make_power_cost,
    make_quartic_2d,
)

P4 = make_power_cost(4)  # J = x^4 / 24


def fd_only(pair: VectorFieldPair) -> VectorFieldPair:
    """Same shaping functions, affine metadata stripped: forces the
    finite-difference path."""
    return VectorFieldPair(g1=pair.g1, g2=pair.g2, sigma=pair.sigma, name="fd-only")


class TestLieDerivativeWord:
    # hand-derived for g1 = 1, g2 = -J, J = x^4/24, at x = 2:
    # J = 2/3, J' = 4/3, J'' = 2
    @pytest.mark.parametrize(
        "word, expected",
        [
            ((1,), 1.0),
            ((2,), -2.0 / 3.0),
            ((2, 1), -4.0 / 3.0),  # L_{g1} g2 = -J'
            ((1, 2), 0.0),  # L_{g2} g1 differentiates a constant
            ((2, 1, 1), -2.0),  # -J''
            ((2, 2), 8.0 / 9.0),  # (-J) * (-J')
        ],
    )
    def test_default_pair_frozen_values(self, word, expected):
        assert lie_derivative_word(word, default_pair(), P4, 2.0) == pytest.approx(expected)

    def test_gradient_pair_word(self):
        # seed g1 = J, derive along g2 = 1: plain J'
        assert lie_derivative_word((1, 2), gradient_pair(), P4, 2.0) == pytest.approx(4.0 / 3.0)

    def test_finite_difference_path_matches_exact(self):
        pair = default_pair()
        shadow = fd_only(pair)
        for word in [(2,), (2, 1), (2, 1, 1), (2, 2, 1), (1, 2, 2)]:
            exact = lie_derivative_word(word, pair, P4, 1.7)
            fd = lie_derivative_word(word, shadow, P4, 1.7)
            assert fd == pytest.approx(exact, rel=2e-5, abs=2e-5)

    def test_finite_difference_word_length_cap(self):
        with pytest.raises(ValueError, match="word"):
            lie_derivative_word((2, 1, 1, 1, 1), fd_only(default_pair()), P4, 1.0)

    def test_word_validation(self):
        with pytest.raises(ValueError):
            lie_derivative_word((), default_pair(), P4, 1.0)
        with pytest.raises(ValueError):
            lie_derivative_word((3,), default_pair(), P4, 1.0)

    def test_requires_scalar_cost(self):
        with pytest.raises(ValueError, match="one-dimensional"):
            lie_derivative_word((2, 1), default_pair(), make_quartic_2d(), 1.0)


class TestAdBracket:
    @pytest.mark.parametrize(
        "order, expected",
        [(1, -4.0 / 3.0), (2, -2.0), (3, -2.0), (4, -1.0), (5, 0.0)],
    )
    def test_collapses_to_negative_derivative(self, order, expected):
        # ad^N applied to the default pair picks out -J^(N)
        assert ad_bracket(order, default_pair(), P4, 2.0) == pytest.approx(expected)

    def test_sigma_scales_linearly(self):
        one = ad_bracket(3, default_pair(1.0), P4, 2.0)
        two = ad_bracket(3, default_pair(2.0), P4, 2.0)
        assert two == pytest.approx(2.0 * one)

    def test_gradient_pair_gives_negative_gradient(self):
        assert ad_bracket(1, gradient_pair(), P4, 2.0) == pytest.approx(-4.0 / 3.0)

    def test_rejects_order_zero(self):
        with pytest.raises(ValueError):
            ad_bracket(0, default_pair(), P4, 1.0)

    @given(
        x=st.floats(min_value=-2.5, max_value=2.5),
        order=st.integers(min_value=1, max_value=5),
        degree=st.integers(min_value=2, max_value=7),
        sigma=st.floats(min_value=0.25, max_value=4.0),
    )
    @settings(max_examples=60)
    def test_identity_against_cost_derivative(self, x, order, degree, sigma):
        model = make_power_cost(degree, x_star=0.25)
        got = ad_bracket(order, default_pair(sigma), model, x)
        want = -sigma * model.derivative(order, [x])
        assert got == pytest.approx(want, rel=1e-10, abs=1e-10)


class TestAdBracketRecursive:
    @pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
    def test_agrees_with_word_expansion(self, order):
        direct = ad_bracket(order, default_pair(), P4, 1.3)
        recursive = ad_bracket_recursive(order, default_pair(), P4, 1.3)
        assert recursive == pytest.approx(direct, rel=1e-12, abs=1e-12)

    def test_finite_difference_fallback(self):
        shadow = fd_only(default_pair())
        for order in (1, 2, 3):
            exact = ad_bracket(order, default_pair(), P4, 1.6)
            fd = ad_bracket_recursive(order, shadow, P4, 1.6)
            assert fd == pytest.approx(exact, rel=5e-4, abs=5e-4)

    def test_finite_difference_order_cap(self):
        with pytest.raises(ValueError, match="order <= 3"):
            ad_bracket_recursive(4, fd_only(default_pair()), P4, 1.0)


class TestLieBracket:
    def test_matches_first_order_ad(self):
        got = lie_bracket(1, 2, default_pair(), P4, 2.0)
        assert got == pytest.approx(ad_bracket(1, default_pair(), P4, 2.0))

    def test_antisymmetry(self):
        fwd = lie_bracket(1, 2, default_pair(), P4, 1.9)
        rev = lie_bracket(2, 1, default_pair(), P4, 1.9)
        assert rev == pytest.approx(-fwd)

    def test_same_channel_vanishes(self):
        assert lie_bracket(1, 1, default_pair(), P4, 1.5) == pytest.approx(0.0, abs=1e-12)
        assert lie_bracket(2, 2, default_pair(), P4, 1.5) == pytest.approx(0.0, abs=1e-12)

    def test_channel_validation(self):
        with pytest.raises(ValueError):
            lie_bracket(0, 2, default_pair(), P4, 1.0)
