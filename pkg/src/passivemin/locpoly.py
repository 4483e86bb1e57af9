"""Regularized local polynomial fits.

At a center ``z`` with bandwidth ``h`` the fit accumulates::

    B = 1/(N h^d) sum_i U(u_i) U(u_i)^T K(u_i)
    D = 1/(N h^d) sum_i y_i U(u_i) K(u_i),       u_i = (x_i - z) / h

and solves ``(B + ridge I) theta = D``. The gradient estimate is the
degree-one block of ``theta`` divided by ``h``; the value estimate is
``theta[0]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .kernel import Kernel, evaluate
from .polybasis import MultiIndexBasis, u_vector


class SingularSystem(np.linalg.LinAlgError):
    """Raised when ``B + ridge I`` is not numerically positive definite."""


def as_observations(X, y, d: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Validate and convert design points and responses to float arrays.

    Returns ``X`` with shape (n, d) and ``y`` with shape (n,).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if (d is None or d == 1) else X.reshape(-1, d)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X of shape {X.shape} does not match y of length {y.shape[0]}")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected {d}-dimensional design points, got {X.shape[1]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("observations must be finite")
    return X, y


@dataclass(frozen=True)
class LocalPolyFit:
    center: np.ndarray
    bandwidth: float
    ridge: float
    B: np.ndarray
    D: np.ndarray
    n_used: int
    n_total: int
    basis: MultiIndexBasis


@dataclass(frozen=True)
class ThetaHat:
    coeffs: np.ndarray
    fit: LocalPolyFit


def accumulate_fit(X, y, z, h: float, kernel: Kernel, basis: MultiIndexBasis,
                   normalization_count: int, ridge: float = 0.0) -> LocalPolyFit:
    """Kernel-weighted moment matrix and vector at center ``z``.

    Points farther than ``h`` from ``z`` carry zero kernel weight and are
    dropped by a norm test before any feature is formed.
    """
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    if normalization_count < 1:
        raise ValueError(f"normalization_count must be >= 1, got {normalization_count}")
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    X = np.asarray(X, dtype=float).reshape(-1, basis.d)
    y = np.asarray(y, dtype=float).reshape(-1)
    z = np.asarray(z, dtype=float).reshape(basis.d)

    u = (X - z) / h
    r2 = np.einsum("ij,ij->i", u, u)
    near = r2 <= 1.0
    u = u[near]
    w = evaluate(kernel, u) if u.shape[0] else np.zeros(0)
    U = u_vector(basis, u) if u.shape[0] else np.zeros((0, basis.S))
    scale = 1.0 / (normalization_count * h ** basis.d)
    Uw = U * w[:, None]
    B = scale * (Uw.T @ U)
    B = 0.5 * (B + B.T)
    D = scale * (Uw.T @ y[near])
    return LocalPolyFit(center=z, bandwidth=float(h), ridge=float(ridge), B=B, D=D,
                        n_used=int(np.count_nonzero(w)), n_total=int(X.shape[0]), basis=basis)


def solve_regularized(fit: LocalPolyFit) -> ThetaHat:
    """Solve ``(B + ridge I) theta = D`` by Cholesky factorization."""
    M = fit.B + fit.ridge * np.eye(fit.basis.S)
    try:
        factor = linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(
            f"moment matrix is not positive definite (ridge={fit.ridge}, "
            f"n_used={fit.n_used}); supply a positive ridge"
        ) from exc
    coeffs = linalg.cho_solve(factor, fit.D, check_finite=False)
    if not np.all(np.isfinite(coeffs)):
        raise SingularSystem("non-finite solution; the moment matrix is numerically singular")
    return ThetaHat(coeffs=coeffs, fit=fit)


def gradient_estimate(theta: ThetaHat) -> np.ndarray:
    basis = theta.fit.basis
    if basis.ell < 1:
        raise ValueError("gradient estimate needs a basis of degree >= 1")
    return basis.selector() @ theta.coeffs / theta.fit.bandwidth


def value_estimate(theta: ThetaHat) -> float:
    return float(theta.coeffs[0])


def local_fit(X, y, z, h, ridge, kernel, basis, normalization_count=None) -> ThetaHat:
    """Accumulate and solve in one call. Normalization defaults to ``len(y)``."""
    count = len(np.asarray(y).reshape(-1)) if normalization_count is None else normalization_count
    return solve_regularized(accumulate_fit(X, y, z, h, kernel, basis, max(int(count), 1), ridge))
