"""Passive zero-order projected gradient descent.

At round ``k`` the gradient at the current iterate is estimated by a
ridge-regularized local polynomial fit over the first ``k`` observations
and a projected step of size ``2 / (alpha k)`` is taken::

    h_k      = (log(k + 1) / k) ** (1 / (2 beta + d))
    lambda_k = (log(k + 1) / k) ** (beta / (2 beta + d))
    z_{k+1}  = Proj(z_k - eta_k * g_k(z_k))

The schedules need ``beta`` and ``alpha``; both are user inputs.
Guarantees for the last iterate assume an interior minimizer with zero
gradient; boundary minimizers fall outside that hypothesis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _jit
from .kernel import Kernel, make_kernel
from .locpoly import accumulate_fit, as_observations, gradient_estimate, solve_regularized
from .polybasis import MultiIndexBasis, build_basis, degree_from_beta


@dataclass(frozen=True)
class Domain:
    """A box ``[lo, hi]`` or a Euclidean ball, the feasible set of the iterates."""

    shape: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.shape == "box":
            lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
            hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
            if lo.shape != hi.shape or lo.ndim != 1:
                raise ValueError("box bounds must be 1-d arrays of equal length")
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo <= hi)):
                raise ValueError(f"invalid box bounds lo={lo}, hi={hi}")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.shape == "ball":
            center = np.atleast_1d(np.asarray(self.center, dtype=float))
            if self.radius is None or not float(self.radius) > 0:
                raise ValueError(f"ball radius must be positive, got {self.radius}")
            object.__setattr__(self, "center", center)
            object.__setattr__(self, "radius", float(self.radius))
        else:
            raise ValueError(f"unknown domain shape {self.shape!r}")

    @classmethod
    def box(cls, lo, hi, d: int | None = None) -> "Domain":
        if d is not None:
            lo = np.broadcast_to(np.asarray(lo, dtype=float), (d,))
            hi = np.broadcast_to(np.asarray(hi, dtype=float), (d,))
        return cls("box", lo=lo, hi=hi)

    @classmethod
    def ball(cls, center, radius: float) -> "Domain":
        return cls("ball", center=center, radius=radius)

    @property
    def d(self) -> int:
        return int(self.lo.shape[0] if self.shape == "box" else self.center.shape[0])

    def centroid(self) -> np.ndarray:
        if self.shape == "box":
            return 0.5 * (self.lo + self.hi)
        return self.center.copy()

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if self.shape == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def inflated_bounds(self, margin: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box of the domain grown by ``margin`` in every direction."""
        if self.shape == "box":
            return self.lo - margin, self.hi + margin
        r = self.radius + margin
        return self.center - r, self.center + r

    def _jit_args(self):
        if self.shape == "box":
            return _jit.BOX, self.lo, self.hi
        return _jit.BALL, self.center, np.array([self.radius])

    def to_dict(self) -> dict:
        if self.shape == "box":
            return {"shape": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        return {"shape": "ball", "center": self.center.tolist(), "radius": self.radius}

    @classmethod
    def from_dict(cls, spec: dict, d: int | None = None) -> "Domain":
        if spec["shape"] == "box":
            return cls.box(spec["lo"], spec["hi"], d=d)
        center = spec.get("center", np.zeros(d or 1))
        if d is not None:
            center = np.broadcast_to(np.asarray(center, dtype=float), (d,))
        return cls.ball(center, spec["radius"])


def project(domain: Domain, x) -> np.ndarray:
    """Euclidean projection onto the domain."""
    x = np.asarray(x, dtype=float)
    if domain.shape == "box":
        return np.clip(x, domain.lo, domain.hi)
    v = x - domain.center
    r = np.linalg.norm(v)
    if r <= domain.radius:
        return x.copy()
    return domain.center + domain.radius * v / r


@dataclass(frozen=True)
class Schedule:
    beta: float
    alpha: float
    d: int

    def __post_init__(self):
        if not self.beta >= 2:
            raise ValueError(f"beta must be >= 2, got {self.beta}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")

    @property
    def bandwidth_exponent(self) -> float:
        return 1.0 / (2 * self.beta + self.d)

    @property
    def ridge_exponent(self) -> float:
        return self.beta / (2 * self.beta + self.d)

    @property
    def degree(self) -> int:
        return degree_from_beta(self.beta)


def schedule_values(s: Schedule, k: int) -> tuple[float, float, float]:
    """``(h_k, lambda_k, eta_k)`` at round ``k >= 1``."""
    if int(k) != k or k < 1:
        raise ValueError(f"round index must be a positive integer, got {k}")
    ratio = math.log(k + 1.0) / k
    return ratio ** s.bandwidth_exponent, ratio ** s.ridge_exponent, 2.0 / (s.alpha * k)


@dataclass
class OptimizerState:
    k: int
    z: np.ndarray
    z_sum: np.ndarray
    trajectory: list | None = field(default=None)

    @classmethod
    def start(cls, z1, record: bool = False) -> "OptimizerState":
        z1 = np.asarray(z1, dtype=float).copy()
        return cls(k=1, z=z1, z_sum=np.zeros_like(z1), trajectory=[] if record else None)

    @property
    def average(self) -> np.ndarray:
        return self.z_sum / max(self.k - 1, 1)


def step(state: OptimizerState, schedule: Schedule, domain: Domain, X, y,
         kernel: Kernel, basis: MultiIndexBasis) -> OptimizerState:
    """One round: fit at ``z_k`` over ``X[:k]``, then a projected step.

    ``X`` and ``y`` may be longer than ``k``; only the first ``k`` rows
    are read.
    """
    k = state.k
    if len(y) < k:
        raise ValueError(f"round {k} needs at least {k} observations, got {len(y)}")
    h, lam, eta = schedule_values(schedule, k)
    fit = accumulate_fit(X[:k], y[:k], state.z, h, kernel, basis, normalization_count=k, ridge=lam)
    g = gradient_estimate(solve_regularized(fit))
    if state.trajectory is not None:
        state.trajectory.append(state.z.copy())
    z_next = project(domain, state.z - eta * g)
    return OptimizerState(k=k + 1, z=z_next, z_sum=state.z_sum + state.z,
                          trajectory=state.trajectory)


@dataclass(frozen=True)
class RunResult:
    """Outcome of a full pass over ``n`` observations.

    ``z_final`` is the iterate after the last update, ``z_bar`` the mean
    of the ``n`` iterates at which gradients were estimated, and
    ``trajectory`` (when recorded) holds those ``n`` iterates followed by
    ``z_final``.
    """

    z_final: np.ndarray
    z_bar: np.ndarray
    trajectory: np.ndarray | None
    n: int


def run(X, y, schedule: Schedule, domain: Domain, z1=None, kernel: Kernel | None = None,
        basis: MultiIndexBasis | None = None, record: bool = False,
        engine: str = "jit") -> RunResult:
    """Run the recursion over every observation in order.

    ``engine="jit"`` uses the compiled loop; ``engine="numpy"`` steps
    through ``step`` and is kept as a readable reference.
    """
    X, y = as_observations(X, y, d=schedule.d)
    if X.shape[0] == 0:
        raise ValueError("need at least one observation")
    if domain.d != schedule.d:
        raise ValueError(f"domain dimension {domain.d} != schedule dimension {schedule.d}")
    kernel = kernel or make_kernel("quartic", schedule.d)
    basis = basis or build_basis(schedule.d, schedule.degree)
    z1 = domain.centroid() if z1 is None else np.asarray(z1, dtype=float).reshape(schedule.d)
    if not domain.contains(z1, tol=1e-12):
        raise ValueError(f"starting point {z1} lies outside the domain")
    n = X.shape[0]

    if engine == "numpy":
        state = OptimizerState.start(z1, record=record)
        for _ in range(n):
            state = step(state, schedule, domain, X, y, kernel, basis)
        traj = None
        if record:
            traj = np.vstack(state.trajectory + [state.z])
        return RunResult(z_final=state.z, z_bar=state.z_sum / n, trajectory=traj, n=n)
    if engine != "jit":
        raise ValueError(f"unknown engine {engine!r}")

    shape, lo, hi = domain._jit_args()
    z, z_bar, traj, failures = _jit.run_pgd(
        np.ascontiguousarray(X.T), y, z1, float(schedule.beta), float(schedule.alpha),
        shape, lo, hi, kernel.code, kernel.normalization,
        *basis.parents(), record,
    )
    if failures:
        # cannot happen for a positive ridge; surfaces numerical breakdown
        raise FloatingPointError(f"{failures} rounds failed to factor the ridge system")
    return RunResult(z_final=z, z_bar=z_bar, trajectory=traj if record else None, n=n)
