"""Estimate the minimizer and minimum value of a strongly convex regression
function from i.i.d. noisy samples under passive design."""
from .harness import ExperimentPlan, RiskReport, fit_rate, run_experiment, theoretical_exponent
from .kernel import Kernel, make_kernel
from .locpoly import (LocalPolyFit, SingularSystem, ThetaHat, accumulate_fit, gradient_estimate,
                      local_fit, solve_regularized, value_estimate)
from .minvalue import OddSampleSize, estimate_min_value
from .optimizer import Domain, Schedule, project, run, schedule_values
from .polybasis import MultiIndexBasis, build_basis, degree_from_beta, u_vector
from .testbed import ScenarioSpec, sample_scenario

__version__ = "0.1.0"
