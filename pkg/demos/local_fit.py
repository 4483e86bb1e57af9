"""
Local polynomial gradient estimates
===================================

Noisy samples of a smooth function, and the kernel-weighted local fit
that recovers its value and slope at a few centers.
"""
import numpy as np

from passivemin import build_basis, make_kernel
from passivemin.locpoly import gradient_estimate, local_fit, value_estimate

rng = np.random.default_rng(0)
X = rng.uniform(-1, 1, size=(5000, 1))
y = np.sin(2 * X[:, 0]) + 0.1 * rng.standard_normal(5000)

kernel = make_kernel("quartic", d=1)
basis = build_basis(d=1, ell=2)

print(f"{'z':>6s} {'f(z)':>9s} {'f_hat':>9s} {'f_prime':>9s} {'g_hat':>9s}")
for z in (-0.6, -0.2, 0.0, 0.3, 0.7):
    theta = local_fit(X, y, [z], h=0.25, ridge=1e-6, kernel=kernel, basis=basis)
    print(f"{z:6.2f} {np.sin(2 * z):9.4f} {value_estimate(theta):9.4f} "
          f"{2 * np.cos(2 * z):9.4f} {gradient_estimate(theta)[0]:9.4f}")

# A wider window lowers variance but lets curvature leak into the slope
for h in (0.05, 0.15, 0.5, 0.9):
    g = gradient_estimate(local_fit(X, y, [0.3], h, 1e-6, kernel, build_basis(1, 1)))[0]
    print(f"h = {h:4.2f}  slope at 0.3: {g:.4f}  (true {2 * np.cos(0.6):.4f})")
