"""Lie-bracket extremum seeking with high-order dither designs.

The library designs sinusoidal dither pairs that excite an iterated
Lie bracket of chosen order, integrates the resulting closed loops on
flat-bottomed costs, certifies the designs by brute-force quadrature of
the underlying iterated integrals, and quantifies convergence rates.
"""

from .analysis import (
    DecayFit,
    compare_fits,
    envelope,
    envelope_points,
    fit_exponential,
    fit_polynomial,
    preferred_model,
    residual_order,
)
from .brackets import ad_bracket, ad_bracket_recursive, lie_bracket, lie_derivative_word
from .costs import (
    AssumptionReport,
    CostModel,
    VectorFieldPair,
    default_pair,
    fd_partial,
    gradient_pair,
    make_power_cost,
    make_quartic_2d,
    make_separable_cost,
    verify_assumption,
)
from .dither import (
    DitherChannel,
    DitherSpec,
    ResonanceReport,
    bracket_coefficient,
    check_nonresonance,
    design_dithers,
    design_multivariable,
    eval_dither,
)
from .integrals import (
    ExcitationCertificate,
    IntegralRequest,
    WordCheck,
    certify_excitation,
    closed_form_I,
    iterated_integral,
)
from .simulate import (
    ESConfig,
    PRESET_NAMES,
    Trajectory,
    initial_speed,
    load_trajectory_csv,
    one_period_map,
    preset,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # dither design
    "DitherChannel",
    "DitherSpec",
    "ResonanceReport",
    "bracket_coefficient",
    "design_dithers",
    "design_multivariable",
    "eval_dither",
    "check_nonresonance",
    # costs and field pairs
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
    # bracket engine
    "lie_derivative_word",
    "ad_bracket",
    "ad_bracket_recursive",
    "lie_bracket",
    # iterated integrals
    "IntegralRequest",
    "iterated_integral",
    "closed_form_I",
    "WordCheck",
    "ExcitationCertificate",
    "certify_excitation",
    # simulation
    "ESConfig",
    "Trajectory",
    "simulate",
    "one_period_map",
    "preset",
    "PRESET_NAMES",
    "initial_speed",
    "load_trajectory_csv",
    # analysis
    "DecayFit",
    "envelope",
    "envelope_points",
    "fit_exponential",
    "fit_polynomial",
    "compare_fits",
    "preferred_model",
    "residual_order",
]
