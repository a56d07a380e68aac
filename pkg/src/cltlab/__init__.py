"""Numerical laboratory for central limit behaviour under volatility uncertainty.

Exact backward sup-expectation recursions over finite families of zero-mean
laws, a monotone explicit solver for the G-heat (Barenblatt) equation with
analytic and Monte-Carlo cross-checks, space-time mollification and Holder
regularity audits, and convergence-rate experiments comparing the two sides.
"""

from .errors import GridTooSmallError, LabError
from .families import (
    BadNError,
    DiscreteDist,
    DuplicateSupportError,
    EmptyFamilyError,
    Family,
    NonUnitMassError,
    NonZeroMeanError,
    build_family,
    builtin_family,
    check_cubic_condition,
    conjecture_family,
    family_from_config,
    family_to_config,
    make_discrete,
    moment,
    rademacher,
)
from .fields import GridSpec, OutOfHullError, TimeGrid, ValueField
from .gheat import (
    CFLViolatedError,
    ControlPath,
    DegenerateGridError,
    GHeatProblem,
    NotConvexError,
    SchemeSpec,
    barenblatt_rhs,
    constant_control,
    convex_oracle,
    default_spec,
    gauss_hermite_expectation,
    gaussian_abs_mean,
    mc_lower_bound,
    richardson_value,
    sign_feedback_control,
    solve_gheat,
)
from .payoffs import (
    Payoff,
    abs_payoff,
    abs_pow_payoff,
    convexity_audit,
    cosine_payoff,
    holder_audit,
    make_payoff,
    neg_abs_payoff,
    payoff_from_config,
    piecewise_linear_payoff,
)
from .rates import (
    ConjectureReport,
    RateReport,
    ReferenceTooCoarseError,
    TooFewPointsError,
    conjecture_experiment,
    error_curve,
    fit_loglog,
    theoretical_exponent,
)
from .recursion import (
    ModeMismatchError,
    origin_value,
    solve_recursion,
    step_expectation,
)
from .smoothing import (
    DomainTooSmallError,
    HypothesisViolatedError,
    MollifierSpec,
    ResolutionTooCoarseError,
    SampledSurface,
    mollify,
    regularity_audit,
    surface_from_field,
    surface_from_function,
    verify_smoothing_bounds,
)

__version__ = "0.1.0"
