"""Synthetic problems with known minimizer and minimum value.

Objectives
    ``quadratic``             alpha (1 + delta) |x - center|^2 / 2 + offset
    ``shifted-quadratic``     same family, named for configs with an offset
    ``quadratic-plus-bump``   the quadratic plus r h^beta Phi((x - x_n) / h),
                              h = n_ref^(-1/(2 beta + d)), x_n = (h/8, 0, ...)
    ``cosine-perturbed-quadratic``
                              alpha |x|^2 / 2 - eps prod_j cos(omega x_j)

Designs are uniform or truncated Gaussian on a box covering the domain
grown by one unit; noise is Gaussian, Laplace or absent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats
from scipy.interpolate import CubicSpline

from .optimizer import Domain

# ---------------------------------------------------------------- bump functions


def _phi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t):
    """C-infinity ramp, 0 for t <= 0 and 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a, b = _phi(t), _phi(1.0 - t)
    return a / (a + b)


def eta(x):
    """Smooth plateau: 0 outside [0, 1/2], 1 on [1/8, 3/8]."""
    x = np.asarray(x, dtype=float)
    out = np.where((x >= 0.125) & (x <= 0.375), 1.0, 0.0)
    rise = (x > 0) & (x < 0.125)
    fall = (x > 0.375) & (x < 0.5)
    out = np.where(rise, smoothstep(8.0 * x), out)
    out = np.where(fall, smoothstep(8.0 * (0.5 - x)), out)
    return out


def eta_prime(x):
    """Derivative of ``eta``, analytic on the two ramps."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for mask, sign, arg in (((x > 0) & (x < 0.125), 8.0, 8.0 * x),
                            ((x > 0.375) & (x < 0.5), -8.0, 8.0 * (0.5 - x))):
        t = arg[mask]
        # s = expit(-g), g = 1/t - 1/(1-t), so s' = -s (1 - s) g'
        g = 1.0 / t - 1.0 / (1.0 - t)
        dg = -1.0 / t**2 - 1.0 / (1.0 - t) ** 2
        s = special.expit(-g)
        out[mask] = sign * (-s * (1.0 - s) * dg)
    return out


@dataclass(frozen=True)
class BumpFunctions:
    """``eta``, its primitive-difference ``Psi`` and the tensor bump ``Phi``.

    ``Psi(t) = E(t + 1/2) - E(t)`` with ``E`` the primitive of ``eta``.
    ``E`` is tabulated by quadrature on the rising ramp [0, 1/8] (step
    1e-3) and interpolated by a cubic spline; it is linear on the plateau
    and obtained by symmetry on the falling ramp.
    """

    ramp: CubicSpline = field(repr=False)
    ramp_mass: float

    def eta(self, x):
        return eta(x)

    @property
    def total_mass(self) -> float:
        return 2.0 * self.ramp_mass + 0.25

    def primitive(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t <= 0, 0.0, self.total_mass)
        r = (t > 0) & (t < 0.125)
        out = np.where(r, self.ramp(np.clip(t, 0, 0.125)), out)
        plateau = (t >= 0.125) & (t <= 0.375)
        out = np.where(plateau, self.ramp_mass + (t - 0.125), out)
        f = (t > 0.375) & (t < 0.5)
        out = np.where(f, self.total_mass - self.ramp(np.clip(0.5 - t, 0, 0.125)), out)
        return out

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        return self.primitive(t + 0.5) - self.primitive(t)

    def psi_prime(self, t):
        t = np.asarray(t, dtype=float)
        return eta(t + 0.5) - eta(t)

    def psi_second(self, t):
        t = np.asarray(t, dtype=float)
        return eta_prime(t + 0.5) - eta_prime(t)

    @property
    def psi_max(self) -> float:
        # Psi rises on [-1/2, 0] and falls on [0, 1/2]
        return self.total_mass

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        return np.prod(self.psi(x), axis=-1)


@lru_cache(maxsize=1)
def make_bumps(step: float = 1e-3) -> BumpFunctions:
    nodes = np.linspace(0.0, 0.125, int(round(0.125 / step)) + 1)
    pieces = [integrate.quad(lambda v: float(eta(v)), a, b, epsabs=1e-15, epsrel=1e-13)[0]
              for a, b in zip(nodes[:-1], nodes[1:])]
    values = np.concatenate([[0.0], np.cumsum(pieces)])
    # clamped spline: the ramp's slope is eta, zero at 0 and one at 1/8
    spline = CubicSpline(nodes, values, bc_type=((1, 0.0), (1, 1.0)))
    return BumpFunctions(ramp=spline, ramp_mass=float(values[-1]))


MAX_ETA_SLOPE = 16.0  # 8 * sup smoothstep' = 8 * 2, attained at mid-ramp

# ---------------------------------------------------------------- objectives


class Objective:
    """Base class; subclasses fill in ``value`` and ``gradient``."""

    family: str
    d: int
    known_minimizer: np.ndarray
    known_minimum: float
    strong_convexity: float
    holder_beta_claimed: float

    def __call__(self, x):
        return self.value(x)

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Quadratic(Objective):
    alpha: float = 2.0
    d: int = 1
    delta: float = 0.0
    center: tuple = None
    offset: float = 0.0
    family: str = "quadratic"
    holder_beta_claimed: float = math.inf

    def __post_init__(self):
        if not self.alpha > 0 or self.delta < 0:
            raise ValueError("quadratic needs alpha > 0 and delta >= 0")
        c = np.zeros(self.d) if self.center is None else np.broadcast_to(
            np.asarray(self.center, dtype=float), (self.d,))
        object.__setattr__(self, "center", tuple(float(v) for v in c))

    @property
    def curvature(self) -> float:
        return self.alpha * (1.0 + self.delta)

    @property
    def known_minimizer(self):
        return np.array(self.center)

    @property
    def known_minimum(self):
        return float(self.offset)

    @property
    def strong_convexity(self):
        return self.curvature

    def value(self, x):
        x = np.asarray(x, dtype=float)
        diff = x - np.array(self.center)
        return 0.5 * self.curvature * np.sum(diff * diff, axis=-1) + self.offset

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.curvature * (x - np.array(self.center))

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "d": self.d, "delta": self.delta,
                "center": list(self.center), "offset": self.offset}


@dataclass(frozen=True)
class BumpQuadratic(Objective):
    """Quadratic plus a localized smooth bump of height ~ r h^beta.

    With ``r = 0`` this is the plain quadratic. The minimizer formula
    holds when ``r Psi(0)^(d-1) h^(beta-2) / (alpha (1 + delta)) < 1/4``,
    which ``__post_init__`` enforces.
    """

    alpha: float = 2.0
    d: int = 1
    delta: float = 0.1
    r: float = 0.1
    beta: float = 2.0
    n_ref: int = 1000
    family: str = "quadratic-plus-bump"

    def __post_init__(self):
        if not self.alpha > 0 or self.delta < 0 or self.r < 0:
            raise ValueError("bump quadratic needs alpha > 0, delta >= 0, r >= 0")
        if not self.beta >= 2:
            raise ValueError("bump quadratic needs beta >= 2")
        shift = self.r * self.bumps.psi_max ** (self.d - 1) * self.h ** (self.beta - 2) / self.curvature
        if shift >= 0.25:
            raise ValueError("r too large: the minimizer leaves the bump's linear zone")

    @property
    def bumps(self) -> BumpFunctions:
        return make_bumps()

    @property
    def holder_beta_claimed(self):
        return self.beta

    @property
    def curvature(self) -> float:
        return self.alpha * (1.0 + self.delta)

    @property
    def h(self) -> float:
        return self.n_ref ** (-1.0 / (2 * self.beta + self.d))

    @property
    def bump_center(self) -> np.ndarray:
        c = np.zeros(self.d)
        c[0] = self.h / 8.0
        return c

    @property
    def amplitude(self) -> float:
        return self.r * self.h ** self.beta

    @property
    def known_minimizer(self):
        x = np.zeros(self.d)
        x[0] = -self.r * self.bumps.psi_max ** (self.d - 1) * self.h ** (self.beta - 1) / self.curvature
        return x

    @property
    def known_minimum(self):
        return float(self.value(self.known_minimizer))

    @property
    def strong_convexity(self):
        # Gershgorin bound on the bump Hessian: Psi'' <= 16, |Psi'| <= 1
        pm = self.bumps.psi_max
        row = MAX_ETA_SLOPE * pm ** (self.d - 1) + (self.d - 1) * pm ** max(self.d - 2, 0)
        return self.curvature - self.r * self.h ** (self.beta - 2) * row

    def value(self, x):
        x = np.asarray(x, dtype=float)
        u = (x - self.bump_center) / self.h
        return 0.5 * self.curvature * np.sum(x * x, axis=-1) + self.amplitude * self.bumps.phi(u)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        u = (x - self.bump_center) / self.h
        psi = self.bumps.psi(u)
        dpsi = self.bumps.psi_prime(u)
        grad = self.curvature * x
        for j in range(self.d):
            others = np.prod(np.delete(psi, j, axis=-1), axis=-1)
            grad[..., j] = grad[..., j] + self.amplitude / self.h * dpsi[..., j] * others
        return grad

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "d": self.d, "delta": self.delta,
                "r": self.r, "beta": self.beta, "n_ref": self.n_ref}


@dataclass(frozen=True)
class CosinePerturbedQuadratic(Objective):
    """``alpha |x|^2 / 2 - eps prod_j cos(omega x_j)`` with minimizer 0.

    Requires ``eps >= 0`` and ``d eps omega^2 < alpha`` so the Hessian
    stays above ``alpha - d eps omega^2``.
    """

    alpha: float = 2.0
    d: int = 1
    eps: float = 0.25
    omega: float = 2.0
    family: str = "cosine-perturbed-quadratic"
    holder_beta_claimed: float = math.inf

    def __post_init__(self):
        if self.eps < 0 or not self.alpha > 0:
            raise ValueError("cosine perturbation needs eps >= 0 and alpha > 0")
        if self.d * self.eps * self.omega**2 >= self.alpha:
            raise ValueError("d * eps * omega^2 must be below alpha for strong convexity")

    @property
    def known_minimizer(self):
        return np.zeros(self.d)

    @property
    def known_minimum(self):
        return -float(self.eps)

    @property
    def strong_convexity(self):
        return self.alpha - self.d * self.eps * self.omega**2

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.alpha * np.sum(x * x, axis=-1) - self.eps * np.prod(np.cos(self.omega * x), axis=-1)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        c = np.cos(self.omega * x)
        grad = self.alpha * x
        for j in range(self.d):
            others = np.prod(np.delete(c, j, axis=-1), axis=-1)
            grad[..., j] = grad[..., j] + self.eps * self.omega * np.sin(self.omega * x[..., j]) * others
        return grad

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "d": self.d, "eps": self.eps,
                "omega": self.omega}


def make_objective(spec: dict) -> Objective:
    spec = dict(spec)
    family = spec.pop("family")
    if family in ("quadratic", "shifted-quadratic"):
        return Quadratic(family=family, **spec)
    if family == "quadratic-plus-bump":
        return BumpQuadratic(**spec)
    if family == "cosine-perturbed-quadratic":
        return CosinePerturbedQuadratic(**spec)
    raise ValueError(f"unknown objective family {family!r}")


def evaluate_objective(obj: Objective, x):
    return obj.value(x)


# ---------------------------------------------------------------- design and noise


@dataclass(frozen=True)
class DesignDensity:
    """Product density on the box ``[lo, hi]`` covering the inflated domain.

    ``uniform-box`` is flat; ``truncated-gaussian`` is a product of normal
    laws with location ``loc`` and scale ``scale`` truncated to the box.
    """

    family: str
    lo: np.ndarray
    hi: np.ndarray
    loc: np.ndarray | None = None
    scale: float = 1.0

    @classmethod
    def for_domain(cls, domain: Domain, family: str = "uniform-box", scale: float = 1.0):
        lo, hi = domain.inflated_bounds(1.0)
        loc = 0.5 * (lo + hi) if family == "truncated-gaussian" else None
        return cls(family=family, lo=np.asarray(lo, float), hi=np.asarray(hi, float), loc=loc,
                   scale=scale)

    @property
    def d(self) -> int:
        return int(self.lo.shape[0])

    def _marginals(self):
        a = (self.lo - self.loc) / self.scale
        b = (self.hi - self.loc) / self.scale
        return stats.truncnorm(a, b, loc=self.loc, scale=self.scale)

    def pdf(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.d)
        inside = np.all((x >= self.lo) & (x <= self.hi), axis=1)
        if self.family == "uniform-box":
            dens = np.full(x.shape[0], 1.0 / np.prod(self.hi - self.lo))
        elif self.family == "truncated-gaussian":
            dens = np.prod(self._marginals().pdf(x), axis=1)
        else:
            raise ValueError(f"unknown design family {self.family!r}")
        return np.where(inside, dens, 0.0)

    @property
    def p_bounds(self) -> tuple[float, float]:
        """Exact (p_min, p_max) over the box."""
        if self.family == "uniform-box":
            p = 1.0 / float(np.prod(self.hi - self.lo))
            return p, p
        m = self._marginals()
        far = np.where(np.abs(self.lo - self.loc) > np.abs(self.hi - self.loc), self.lo, self.hi)
        near = np.clip(self.loc, self.lo, self.hi)
        return float(np.prod(m.pdf(far))), float(np.prod(m.pdf(near)))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.family == "uniform-box":
            return rng.uniform(self.lo, self.hi, size=(n, self.d))
        return self._marginals().rvs(size=(n, self.d), random_state=rng)

    def to_dict(self):
        out = {"family": self.family, "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        if self.family == "truncated-gaussian":
            out.update(loc=self.loc.tolist(), scale=self.scale)
        return out


@dataclass(frozen=True)
class NoiseLaw:
    family: str = "gaussian"
    scale: float = 0.0

    def __post_init__(self):
        if self.family not in ("gaussian", "laplace", "none"):
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.scale < 0:
            raise ValueError("noise scale must be non-negative")

    @property
    def std(self) -> float:
        if self.family == "none":
            return 0.0
        return self.scale * (math.sqrt(2.0) if self.family == "laplace" else 1.0)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.family == "none" or self.scale == 0:
            return np.zeros(n)
        if self.family == "gaussian":
            return self.scale * rng.standard_normal(n)
        return rng.laplace(0.0, self.scale, size=n)

    def to_dict(self):
        return {"family": self.family, "scale": self.scale}


@dataclass(frozen=True)
class ScenarioSpec:
    objective: Objective
    domain: Domain
    density: DesignDensity
    noise: NoiseLaw

    @property
    def d(self) -> int:
        return self.domain.d

    def to_dict(self) -> dict:
        return {"objective": self.objective.to_dict(), "domain": self.domain.to_dict(),
                "density": self.density.to_dict(), "noise": self.noise.to_dict()}

    @classmethod
    def from_dict(cls, spec: dict) -> "ScenarioSpec":
        obj = make_objective(spec["objective"])
        domain = Domain.from_dict(spec.get("domain", {"shape": "box", "lo": -1, "hi": 1}), d=obj.d)
        dens = dict(spec.get("density", {"family": "uniform-box"}))
        if "lo" in dens:
            density = DesignDensity(family=dens["family"], lo=np.broadcast_to(np.asarray(dens["lo"], float), (obj.d,)),
                                    hi=np.broadcast_to(np.asarray(dens["hi"], float), (obj.d,)),
                                    loc=None if dens.get("loc") is None else np.broadcast_to(np.asarray(dens["loc"], float), (obj.d,)),
                                    scale=dens.get("scale", 1.0))
        else:
            density = DesignDensity.for_domain(domain, dens["family"], dens.get("scale", 1.0))
        noise = NoiseLaw(**spec.get("noise", {"family": "none"}))
        return cls(objective=obj, domain=domain, density=density, noise=noise)


def sample_scenario(spec: ScenarioSpec, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` observations ``y = f(x) + noise``; deterministic in ``seed``.

    Design points are drawn before the noise from the same stream, so the
    noise is independent of the design.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X = spec.density.sample(n, rng)
    y = spec.objective.value(X) + spec.noise.sample(n, rng)
    return X, y
