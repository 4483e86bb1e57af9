"""Multi-index enumeration and the scaled monomial feature vector U(u).

The basis holds every d-dimensional multi-index ``m`` with ``|m| <= ell``.
Index 0 is the zero multi-index and indices ``1..d`` are the unit
multi-indices in coordinate order, so the selector matrix that picks
entries ``1..d`` extracts the gradient block of a local polynomial fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np


def degree_from_beta(beta: float) -> int:
    """Largest integer strictly smaller than ``beta``.

    ``beta = 2`` gives 1 and ``beta = 2.5`` gives 2.
    """
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 1:
        raise ValueError(f"beta must exceed 1 so the basis has a gradient block, got {beta}")
    ell = math.floor(beta)
    if ell == beta:
        ell -= 1
    return int(ell)


def _graded_lex(d: int, ell: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for degree in range(ell + 1):
        # combinations of coordinates with repetition, sorted so that
        # (1,0,...) precedes (0,1,...) within a degree
        block = []
        for combo in combinations_with_replacement(range(d), degree):
            m = [0] * d
            for c in combo:
                m[c] += 1
            block.append(tuple(m))
        block.sort(reverse=True)
        out.extend(block)
    return out


@dataclass(frozen=True)
class MultiIndexBasis:
    """Ordered multi-indices of total degree at most ``ell`` in ``d`` variables.

    Attributes
    ----------
    d : int
        Dimension.
    ell : int
        Maximal total degree.
    indices : ndarray of int, shape (S, d)
        Multi-indices, graded lexicographic within each degree.
    factorials : ndarray of float, shape (S,)
        ``m!`` for every index.
    """

    d: int
    ell: int
    indices: np.ndarray = field(repr=False)
    factorials: np.ndarray = field(repr=False)

    @property
    def S(self) -> int:
        return int(self.indices.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def parents(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Recursion ``U[j] = U[parent[j]] * u[var[j]] * coef[j]`` for ``j >= 1``.

        ``parent[j]`` is ``m - e_l`` for the last non-zero coordinate ``l``
        of ``m``, and ``coef[j] = 1 / m_l``. Entry 0 is unused.
        """
        lookup = {tuple(int(v) for v in m): j for j, m in enumerate(self.indices)}
        parent = np.zeros(self.S, dtype=np.int64)
        var = np.zeros(self.S, dtype=np.int64)
        coef = np.ones(self.S)
        for j in range(1, self.S):
            m = [int(v) for v in self.indices[j]]
            l = max(i for i, v in enumerate(m) if v)
            coef[j] = 1.0 / m[l]
            m[l] -= 1
            parent[j], var[j] = lookup[tuple(m)], l
        return parent, var, coef

    def selector(self) -> np.ndarray:
        """The (d, S) matrix with ones at ``(i, i + 1)``."""
        A = np.zeros((self.d, self.S))
        A[np.arange(self.d), np.arange(1, self.d + 1)] = 1.0
        return A


def build_basis(d: int, ell: int) -> MultiIndexBasis:
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if int(ell) != ell or ell < 0:
        raise ValueError(f"ell must be a non-negative integer, got {ell}")
    d, ell = int(d), int(ell)
    idx = np.array(_graded_lex(d, ell), dtype=np.int64).reshape(-1, d)
    fact = np.array([math.prod(math.factorial(int(k)) for k in m) for m in idx], dtype=float)
    idx.setflags(write=False)
    fact.setflags(write=False)
    return MultiIndexBasis(d=d, ell=ell, indices=idx, factorials=fact)


def u_vector(basis: MultiIndexBasis, u) -> np.ndarray:
    """Evaluate ``U(u)``, componentwise ``u**m / m!`` with ``0**0 = 1``.

    ``u`` may be a single point of shape (d,) or a batch of shape (N, d);
    the result has shape (S,) or (N, S) accordingly.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim <= 1
    pts = np.atleast_2d(u).reshape(-1, basis.d) if u.size else np.zeros((0, basis.d))
    if single and pts.shape[0] != 1:
        raise ValueError(f"expected a point of dimension {basis.d}, got shape {u.shape}")
    # powers[n, l, p] = u_l ** p; numpy defines 0.0 ** 0 == 1.0
    powers = pts[:, :, None] ** np.arange(basis.ell + 1)
    cols = np.arange(basis.d)
    out = np.ones((pts.shape[0], basis.S))
    for j, m in enumerate(basis.indices):
        out[:, j] = np.prod(powers[:, cols, m], axis=1)
    out /= basis.factorials
    return out[0] if single else out
