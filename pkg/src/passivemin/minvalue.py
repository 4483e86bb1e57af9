"""Two-stage estimation of the minimum value by sample splitting.

Stage 1 runs the projected gradient recursion on the first half of the
data and keeps the averaged iterate. Stage 2 evaluates a ridge-regularized
local polynomial estimate of ``f`` at that point using only the second
half, with ``h = n^(-1/(2 beta + d))`` and ``ridge = n^(-beta/(2 beta + d))``.
The two halves never mix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import Kernel, make_kernel
from .locpoly import accumulate_fit, as_observations, solve_regularized, value_estimate
from .optimizer import Domain, Schedule, run
from .polybasis import MultiIndexBasis, build_basis


class OddSampleSize(ValueError):
    """The two-stage estimator needs an even number of observations."""


@dataclass(frozen=True)
class SplitPlan:
    n: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise OddSampleSize(f"sample size must be even and >= 2, got {self.n}")

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def first_half(self) -> slice:
        return slice(0, self.m)

    @property
    def second_half(self) -> slice:
        return slice(self.m, self.n)


@dataclass(frozen=True)
class StageTwoSchedule:
    n: int
    beta: float
    d: int

    @property
    def bandwidth(self) -> float:
        return self.n ** (-1.0 / (2 * self.beta + self.d))

    @property
    def ridge(self) -> float:
        return self.n ** (-self.beta / (2 * self.beta + self.d))


def value_at(X2, y2, z, n: int, beta: float, kernel: Kernel,
             basis: MultiIndexBasis) -> float:
    """Second-stage value estimate at ``z`` from the held-out half.

    ``n`` is the full sample size: it sets the bandwidth and ridge, and the
    moments are normalized by ``n / 2``.
    """
    sched = StageTwoSchedule(n=n, beta=beta, d=basis.d)
    fit = accumulate_fit(X2, y2, z, sched.bandwidth, kernel, basis,
                         normalization_count=max(n // 2, 1), ridge=sched.ridge)
    return value_estimate(solve_regularized(fit))


@dataclass(frozen=True)
class MinValueEstimate:
    f_hat: float
    z_stage1: np.ndarray
    n: int
    m: int
    bandwidth: float
    ridge: float


def estimate_min_value(X, y, schedule: Schedule, domain: Domain,
                       kernel: Kernel | None = None, basis: MultiIndexBasis | None = None,
                       z1=None, stage1: str = "average") -> MinValueEstimate:
    """Estimate ``min f`` on the domain from ``n`` (even) observations.

    ``stage1="last"`` uses the final iterate of the first stage instead of
    the average.
    """
    X, y = as_observations(X, y, d=schedule.d)
    plan = SplitPlan(int(y.shape[0]))
    if stage1 not in ("average", "last"):
        raise ValueError(f"stage1 must be 'average' or 'last', got {stage1!r}")
    kernel = kernel or make_kernel("quartic", schedule.d)
    basis = basis or build_basis(schedule.d, schedule.degree)

    first = plan.first_half
    res = run(X[first], y[first], schedule, domain, z1=z1, kernel=kernel, basis=basis)
    center = res.z_bar if stage1 == "average" else res.z_final

    second = plan.second_half
    f_hat = value_at(X[second], y[second], center, plan.n, schedule.beta, kernel, basis)
    sched = StageTwoSchedule(n=plan.n, beta=schedule.beta, d=schedule.d)
    return MinValueEstimate(f_hat=f_hat, z_stage1=center, n=plan.n, m=plan.m,
                            bandwidth=sched.bandwidth, ridge=sched.ridge)
