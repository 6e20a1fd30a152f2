#!/usr/bin/env python3
"""Tour of the core solver on a fully structured toy inclusion.

We assemble a 10-dimensional problem that uses all four operator slots:

* a box constraint entering through its projection (the primal resolvent),
* a weighted l1 penalty composed with a random matrix (dual resolvent +
  linear coupling),
* a random skew matrix as the Lipschitz-only forward term (monotone but
  not cocoercive, so plain forward-backward schemes cannot handle it),
* a strongly convex quadratic as the cocoercive forward term.

The quadratic's offset is chosen so that a preselected interior point is
the exact solution, which gives us a free oracle to measure against.
"""

import numpy as np

from pdhf import (ProblemSpec, StepSizes, affine_cocoercive, box_resolvent,
                  fixed_point_residual, l1_resolvent, linear_lipschitz,
                  matrix_map, run, validate_steps)

rng = np.random.default_rng(0)
n, m, lam = 10, 8, 0.3

# random pieces: strongly convex quadratic, skew coupling-in-the-primal,
# random linear map into the dual space
v = rng.standard_normal((n, n))
g_mat = np.eye(n) + v @ v.T / n
r = rng.standard_normal((n, n))
s_mat = 0.5 * (r - r.T) / 2
l_mat = rng.standard_normal((m, n)) / np.sqrt(n)

# manufacture the solution: pick an interior point, force stationarity
x_star = 0.5 * np.tanh(rng.standard_normal(n))
u_star = lam * np.sign(l_mat @ x_star)
g_vec = -(s_mat @ x_star + g_mat @ x_star + l_mat.T @ u_star)

spec = ProblemSpec(
    primal_dim=n, dual_dim=m,
    resolvent=box_resolvent(n, -1.0, 1.0),
    dual_resolvent=l1_resolvent(m, lam),
    coupling=matrix_map(l_mat),
    lipschitz=linear_lipschitz(s_mat),
    cocoercive=affine_cocoercive(g_mat, g_vec),
)

# step sizes straight from the certified constants
beta, zeta = spec.beta, spec.zeta
eps = 0.3
tau = 0.9 * min(2 * beta * eps, np.sqrt(0.5 * (1 - eps)) / zeta)
sigma = 0.9 * (1 - eps - (tau * zeta) ** 2) / (tau * spec.coupling_norm ** 2)
steps = StepSizes(tau=tau, sigma=sigma, epsilon=eps)

print("step-size check:")
print(validate_steps(spec, steps).describe())
print()

report = run(spec, steps, x0=rng.standard_normal(n), max_iters=20000,
             rel_pd_tol=1e-12)
print(f"terminated after {report.n_iters} iterations ({report.termination})")
print(f"distance to the manufactured solution: {np.linalg.norm(report.x - x_star):.2e}")
print(f"fixed-point residual at the last iterate: "
      f"{fixed_point_residual(spec, steps, report.x, report.u):.2e}")

print("\nrelative primal-dual error along the way:")
for k in (1, 10, 50, 100, report.n_iters):
    if k <= report.n_iters:
        print(f"  iter {k:>6d}: {report.rel_pd_err[k - 1]:.3e}")
