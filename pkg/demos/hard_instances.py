"""
Test functions with a known answer
==================================

A quadratic, the same quadratic with a tiny smooth bump that moves its
minimizer, and a cosine-perturbed quadratic with several local wiggles.
"""
import numpy as np
from scipy import optimize

from passivemin.testbed import BumpQuadratic, CosinePerturbedQuadratic, Quadratic, make_bumps

bumps = make_bumps()
t = np.linspace(-0.75, 0.75, 7)
print("Psi on a coarse grid:", np.round(bumps.psi(t), 5))
print("Psi(0) =", float(bumps.psi(0.0)), " total mass of eta =", bumps.total_mass)

f1 = Quadratic(alpha=2.0, d=1, delta=0.1)
for n_ref in (100, 1000, 10000):
    f2 = BumpQuadratic(alpha=2.0, d=1, delta=0.1, r=0.1, beta=2.0, n_ref=n_ref)
    numeric = optimize.minimize_scalar(lambda s: float(f2.value(np.array([s]))), bounds=(-0.5, 0.5),
                                       method="bounded", options={"xatol": 1e-12}).x
    gap = float(f1.value(f2.known_minimizer) - f2.known_minimum)
    print(f"n_ref={n_ref:>6d}  x2* formula {f2.known_minimizer[0]: .3e}  numeric {numeric: .3e}  "
          f"f1 - f2 at x2*: {gap:.3e}")

g = CosinePerturbedQuadratic(alpha=2.0, d=2, eps=0.1, omega=2.0)
print("cosine-perturbed: f* =", g.known_minimum, " strong convexity", g.strong_convexity)
