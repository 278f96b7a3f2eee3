"""Two-sided privacy accounting via discretized privacy loss distributions.

The package computes upper (pessimistic) and lower (optimistic) bounds on
the (epsilon, delta) guarantees of n-fold compositions: exact trade-off
curves of the supported mechanisms are discretized onto a finite epsilon
grid, the resulting loss distributions are composed by lattice convolution,
and the divergence formula converts back to (epsilon, delta).  A
rounding-based baseline estimator is included for comparison.
"""

from .compose import CompositionPolicy, convolve, point_mass_pld, self_compose
from .curves import (
    GaussianCurve,
    HockeyStickCurve,
    LaplaceCurve,
    MechanismSpec,
    PiecewiseLinearCurve,
    PointwiseMaxCurve,
    PoissonSubsampledCurve,
    RandomizedResponseCurve,
    curve_for,
    derivative_at,
    identical_pair_curve,
)
from .errors import NumericalValidityError, PLDBoundsError, RequestError
from .grid import DiscretizationGrid, default_epsilon_range
from .optimistic import (
    CandidateSet,
    candidate_set,
    non_uniqueness_fixture,
    optimistic_pair,
    pb_optimistic_pld,
)
from .pessimistic import pb_pessimistic_pld, pessimistic_pair
from .pld import (
    DiscreteDominatingPair,
    FinitePLD,
    curve_of,
    delta_at,
    discretize_from_curve,
    epsilon_for_delta,
    pld_from_json,
    pld_from_json_dict,
    pld_of,
    pld_to_json,
    pld_to_json_dict,
)
from .report import AccountingRequest, PrivacyBoundReport, run_compute, run_curve, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AccountingRequest",
    "CandidateSet",
    "CompositionPolicy",
    "DiscreteDominatingPair",
    "DiscretizationGrid",
    "FinitePLD",
    "GaussianCurve",
    "HockeyStickCurve",
    "LaplaceCurve",
    "MechanismSpec",
    "NumericalValidityError",
    "PLDBoundsError",
    "PiecewiseLinearCurve",
    "PointwiseMaxCurve",
    "PoissonSubsampledCurve",
    "PrivacyBoundReport",
    "RandomizedResponseCurve",
    "RequestError",
    "candidate_set",
    "convolve",
    "curve_for",
    "curve_of",
    "default_epsilon_range",
    "delta_at",
    "derivative_at",
    "discretize_from_curve",
    "epsilon_for_delta",
    "identical_pair_curve",
    "non_uniqueness_fixture",
    "optimistic_pair",
    "pb_optimistic_pld",
    "pb_pessimistic_pld",
    "pessimistic_pair",
    "pld_from_json",
    "pld_from_json_dict",
    "pld_of",
    "pld_to_json",
    "pld_to_json_dict",
    "point_mass_pld",
    "run_compute",
    "run_curve",
    "run_sweep",
    "self_compose",
]
