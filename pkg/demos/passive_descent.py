"""
Projected gradient descent on passive data
==========================================

The design points arrive from a fixed density; at round k only the first
k observations are used to estimate the gradient at the current iterate.
"""
import numpy as np

from passivemin import Domain, Schedule, run, schedule_values

rng = np.random.default_rng(1)
n = 20000
X = rng.uniform(-2, 2, size=(n, 2))
x_star = np.array([0.3, -0.4])
y = np.sum((X - x_star) ** 2, axis=1) + 0.3 * rng.standard_normal(n)

schedule = Schedule(beta=2.0, alpha=2.0, d=2)
for k in (1, 10, 100, 1000, n):
    h, lam, eta = schedule_values(schedule, k)
    print(f"k={k:>6d}  h={h:.4f}  ridge={lam:.4f}  step={eta:.2e}")

domain = Domain.box(-1, 1, d=2)
res = run(X, y, schedule, domain, record=True)
print("last iterate   ", res.z_final, " error", np.linalg.norm(res.z_final - x_star))
print("averaged iterate", res.z_bar, " error", np.linalg.norm(res.z_bar - x_star))

# Early on the ridge dominates the moment matrix (the design density is
# only 1/16 here), so steps are heavily damped and progress is slow.
for k in (10, 100, 1000, 10000, n):
    print(f"after {k:>6d} rounds: |z - x*| = {np.linalg.norm(res.trajectory[k] - x_star):.4f}")

# The ball domain projects radially
ball = Domain.ball(np.zeros(2), 0.1)
z = run(X, y, schedule, ball).z_final
print("on a ball of radius 0.1:", z, " norm", np.linalg.norm(z))
