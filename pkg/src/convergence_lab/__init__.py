"""Convergence-bound evaluators and empirical constant estimators."""

from .bounds import drift_bound, eta_bound_for_epsilon, eta_bound_monotone, rounds_to_epsilon
from .estimators import (
    LeastSquaresObjective,
    Objective,
    StageNetObjective,
    estimate_constants,
    eta_bound_diagnostic,
    gradient_descent_trace,
)
from .models import ConvergenceConstants, EtaBound

__all__ = [
    "ConvergenceConstants",
    "EtaBound",
    "LeastSquaresObjective",
    "Objective",
    "StageNetObjective",
    "drift_bound",
    "estimate_constants",
    "eta_bound_diagnostic",
    "eta_bound_for_epsilon",
    "eta_bound_monotone",
    "gradient_descent_trace",
    "rounds_to_epsilon",
]
