"""Compactly supported, Lipschitz, non-negative kernels on the unit ball.

Three radial families are available::

    quartic    c * (1 - |u|^2)^2
    triweight  c * (1 - |u|^2)^3
    cone       c * (1 - |u|)

Each is normalized to unit mass in ``R^d``. The kernels carry no
bandwidth; the caller rescales its argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn

FAMILIES = ("quartic", "triweight", "cone")

# long names used in configs and reports
_ALIASES = {
    "quartic-radial": "quartic",
    "triweight-radial": "triweight",
    "cone": "cone",
}

# integer codes shared with the compiled loop in _jit
FAMILY_CODES = {"quartic": 0, "triweight": 1, "cone": 2}


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class Kernel:
    family: str
    d: int
    normalization: float
    lipschitz_bound: float

    @property
    def code(self) -> int:
        return FAMILY_CODES[self.family]

    @property
    def sup(self) -> float:
        return self.normalization

    def __call__(self, u) -> np.ndarray:
        return evaluate(self, u)


def make_kernel(family: str = "quartic", d: int = 1) -> Kernel:
    """Build a kernel of the given family in dimension ``d``.

    For ``c (1 - r^2)^p`` the mass over the unit ball is
    ``d V_d B(d/2, p + 1) / 2`` so ``c`` is its reciprocal; the cone has
    mass ``V_d / (d + 1)``. Lipschitz bounds are the exact suprema of the
    radial derivative.
    """
    family = _ALIASES.get(family, family)
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; choose from {FAMILIES}")
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    d = int(d)
    vd = unit_ball_volume(d)
    if family == "cone":
        c = (d + 1) / vd
        lip = c
    else:
        p = 2 if family == "quartic" else 3
        c = 1.0 / (d * vd * beta_fn(d / 2, p + 1) / 2)
        # sup_r of 2 p r (1 - r^2)^(p - 1), attained at r = 1/sqrt(2p - 1)
        r = 1.0 / math.sqrt(2 * p - 1)
        lip = c * 2 * p * r * (1 - r * r) ** (p - 1)
    return Kernel(family=family, d=d, normalization=float(c), lipschitz_bound=float(lip))


def evaluate(kernel: Kernel, u) -> np.ndarray | float:
    """Kernel values at ``u``; zero outside the unit ball.

    A single point (shape ``(d,)`` or a scalar when ``d == 1``) returns a
    float. Anything else is read as a batch of shape ``(N, d)``; for
    ``d == 1`` a flat array of length ``N`` is also accepted.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 0 or (u.ndim == 1 and u.shape[0] == kernel.d)
    pts = u.reshape(-1, kernel.d)
    r2 = np.einsum("ij,ij->i", pts, pts)
    inside = r2 < 1.0
    out = np.zeros_like(r2)
    s = 1.0 - r2[inside]
    if kernel.family == "quartic":
        out[inside] = kernel.normalization * s * s
    elif kernel.family == "triweight":
        out[inside] = kernel.normalization * s * s * s
    else:
        out[inside] = kernel.normalization * (1.0 - np.sqrt(r2[inside]))
    return float(out[0]) if single else out
