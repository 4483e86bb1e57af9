"""
A small convergence-rate experiment
===================================

Monte Carlo risks on a grid of sample sizes and log-log slopes compared
with the predicted exponents. The acceptance suite runs the same thing
with more replications and a longer grid.
"""
from passivemin import ExperimentPlan, run_experiment
from passivemin.optimizer import Domain
from passivemin.testbed import DesignDensity, NoiseLaw, Quadratic, ScenarioSpec

theta = Domain.box(-1, 1, d=1)
scenario = ScenarioSpec(Quadratic(alpha=2.0, d=1), theta, DesignDensity.for_domain(theta),
                        NoiseLaw("gaussian", 0.3))
plan = ExperimentPlan(scenario=scenario, n_grid=(500, 1000, 2000, 4000, 8000), replications=20,
                      master_seed=7, targets=("minimizer_l2", "optimization", "minvalue_abs"))
report = run_experiment(plan)

for row in report.rows:
    print(f"{row['target']:>14s} n={row['n']:>5d}  risk {row['mean_risk']:.3e} +- {row['stderr']:.1e}")
for target, fit in report.fits.items():
    print(f"{target:>14s} slope {fit['slope']:+.3f} vs {-fit['theoretical_exponent']:+.3f} "
          f"({fit['predictor']})")
