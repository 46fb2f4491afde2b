"""Finite-horizon Bayesian bandits with exponential-family rewards.

Optimal values by backward induction, break-even values, stochastic-order
tools for grid priors and seeded suites that check the structural
monotonicity results numerically.
"""

from .discount import DiscountSequence, geometric, is_decreasing, is_regular, tail, uniform
from .engine import (
    BanditInstance,
    ValueResult,
    advantage_decomposition,
    brute_force_value,
    one_armed,
    optimal_policy_trace,
    two_armed,
    value,
)
from .errors import BanditLabError
from .expfam import ConjugateArm, get_family, posterior_update, predictive
from .indices import breakeven_observation, breakeven_value

__version__ = "0.1.0"

__all__ = [
    "BanditInstance", "BanditLabError", "ConjugateArm", "DiscountSequence", "ValueResult",
    "advantage_decomposition", "breakeven_observation", "breakeven_value", "brute_force_value",
    "geometric", "get_family", "is_decreasing", "is_regular", "one_armed", "optimal_policy_trace",
    "posterior_update", "predictive", "tail", "two_armed", "uniform", "value",
]
