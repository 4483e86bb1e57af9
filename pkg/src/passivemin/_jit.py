"""Compiled inner loops for the projected gradient recursion.

These mirror ``locpoly.accumulate_fit`` / ``solve_regularized`` and
``optimizer.project`` exactly; ``tests/test_optimizer.py`` checks the two
paths agree. Used by ``optimizer.run`` whenever ``engine="jit"``.
"""
import math

import numpy as np
from numba import njit

BOX = 0
BALL = 1


@njit(cache=True)
def _kernel(code, c, r2):
    if r2 >= 1.0:
        return 0.0
    s = 1.0 - r2
    if code == 0:
        return c * s * s
    if code == 1:
        return c * s * s * s
    return c * (1.0 - math.sqrt(r2))


@njit(cache=True)
def _cholesky_solve(M, b):
    # in-place lower Cholesky of a small SPD matrix, then two triangular solves
    S = M.shape[0]
    L = np.zeros((S, S))
    for j in range(S):
        acc = M[j, j]
        for p in range(j):
            acc -= L[j, p] * L[j, p]
        if not acc > 0.0:
            return np.full(S, np.nan)
        L[j, j] = math.sqrt(acc)
        for i in range(j + 1, S):
            acc = M[i, j]
            for p in range(j):
                acc -= L[i, p] * L[j, p]
            L[i, j] = acc / L[j, j]
    w = np.empty(S)
    for i in range(S):
        acc = b[i]
        for p in range(i):
            acc -= L[i, p] * w[p]
        w[i] = acc / L[i, i]
    x = np.empty(S)
    for i in range(S - 1, -1, -1):
        acc = w[i]
        for p in range(i + 1, S):
            acc -= L[p, i] * x[p]
        x[i] = acc / L[i, i]
    return x


@njit(cache=True)
def _accumulate(XT, y, rows, z, h, code, c, parent, var, coef, B, D, ubuf, wbuf, ybuf, Ubuf):
    """Add the kernel-weighted moments of ``rows`` into ``B`` and ``D`` (unscaled).

    In-window points are gathered first; basis columns are then built from
    their parent monomials so every inner loop runs over points.
    """
    d = XT.shape[0]
    S = parent.shape[0]
    inv_h = 1.0 / h
    m = 0
    for i in rows:
        r2 = 0.0
        for l in range(d):
            t = (XT[l, i] - z[l]) * inv_h
            ubuf[l, m] = t
            r2 += t * t
        if r2 > 1.0:
            continue
        w = _kernel(code, c, r2)
        if w == 0.0:
            continue
        wbuf[m] = w
        ybuf[m] = y[i]
        m += 1
    if m == 0:
        return 0
    for i in range(m):
        Ubuf[0, i] = 1.0
    for j in range(1, S):
        pj = parent[j]
        vj = var[j]
        cj = coef[j]
        for i in range(m):
            Ubuf[j, i] = Ubuf[pj, i] * ubuf[vj, i] * cj
    for a in range(S):
        acc = 0.0
        for i in range(m):
            acc += wbuf[i] * Ubuf[a, i] * ybuf[i]
        D[a] += acc
        for b in range(a, S):
            acc = 0.0
            for i in range(m):
                acc += wbuf[i] * Ubuf[a, i] * Ubuf[b, i]
            B[a, b] += acc
    return m


@njit(cache=True)
def _finish(B, D, count, h, d, ridge):
    S = D.shape[0]
    scale = 1.0 / (count * h ** d)
    for a in range(S):
        D[a] *= scale
        for b in range(a, S):
            B[a, b] *= scale
            B[b, a] = B[a, b]
        B[a, a] += ridge
    return _cholesky_solve(B, D)


@njit(cache=True)
def fit_coefficients(XT, y, z, h, ridge, count, code, c, parent, var, coef):
    """theta for the fit over all columns of ``XT`` (shape (d, n)) at ``z``."""
    d, n = XT.shape
    S = parent.shape[0]
    B = np.zeros((S, S))
    D = np.zeros(S)
    _accumulate(XT, y, np.arange(n), z, h, code, c, parent, var, coef, B, D,
                np.empty((d, n)), np.empty(n), np.empty(n), np.empty((S, n)))
    return _finish(B, D, count, h, d, ridge)


@njit(cache=True)
def project(shape, lo, hi, x):
    d = x.shape[0]
    out = np.empty(d)
    if shape == BOX:
        for l in range(d):
            out[l] = min(max(x[l], lo[l]), hi[l])
        return out
    # ball: lo holds the center, hi[0] the radius
    r2 = 0.0
    for l in range(d):
        r2 += (x[l] - lo[l]) ** 2
    r = math.sqrt(r2)
    if r <= hi[0]:
        for l in range(d):
            out[l] = x[l]
        return out
    for l in range(d):
        out[l] = lo[l] + hi[0] * (x[l] - lo[l]) / r
    return out


@njit(cache=True)
def run_pgd(XT, y, z1, beta, alpha, shape, lo, hi, code, c, parent, var, coef, record):
    """Projected gradient recursion over all columns of ``XT`` (shape (d, n)).

    The first coordinates of the observations seen so far are kept sorted,
    so each round only visits the slab ``|x_0 - z_0| <= h_k`` instead of
    scanning the whole prefix.

    Returns the final iterate, the mean of the iterates used at rounds
    ``1..n``, the trajectory (n+1 rows when ``record``), and the number
    of rounds whose ridge system failed to factor.
    """
    d, n = XT.shape
    S = parent.shape[0]
    inv_exp = 1.0 / (2.0 * beta + d)
    z = z1.copy()
    z_sum = np.zeros(d)
    traj = np.empty((n + 1 if record else 0, d))
    keys = np.empty(n)
    order = np.empty(n, dtype=np.int64)
    B = np.empty((S, S))
    D = np.empty(S)
    ubuf = np.empty((d, n))
    wbuf = np.empty(n)
    ybuf = np.empty(n)
    Ubuf = np.empty((S, n))
    failures = 0
    for k in range(1, n + 1):
        v = XT[0, k - 1]
        pos = np.searchsorted(keys[: k - 1], v)
        for j in range(k - 1, pos, -1):
            keys[j] = keys[j - 1]
            order[j] = order[j - 1]
        keys[pos] = v
        order[pos] = k - 1

        if record:
            traj[k - 1] = z
        for l in range(d):
            z_sum[l] += z[l]
        ratio = math.log(k + 1.0) / k
        h = ratio ** inv_exp
        lam = ratio ** (beta * inv_exp)
        eta = 2.0 / (alpha * k)

        first = np.searchsorted(keys[:k], z[0] - h)
        last = np.searchsorted(keys[:k], z[0] + h, side="right")
        B[:] = 0.0
        D[:] = 0.0
        _accumulate(XT, y, order[first:last], z, h, code, c, parent, var, coef, B, D,
                    ubuf, wbuf, ybuf, Ubuf)
        theta = _finish(B, D, k, h, d, lam)
        if np.isnan(theta[0]):
            failures += 1
            continue
        step = np.empty(d)
        for l in range(d):
            step[l] = z[l] - eta * theta[l + 1] / h
        z = project(shape, lo, hi, step)
    if record:
        traj[n] = z
    return z, z_sum / n, traj, failures
