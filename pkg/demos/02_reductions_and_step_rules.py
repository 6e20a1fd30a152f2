#!/usr/bin/env python3
"""The recursion's special cases and the step-size theory behind them.

Dropping operators from the general scheme recovers classical methods,
and the admissible step-size region shrinks or relaxes accordingly:

* no Lipschitz term        -> Condat-Vu, region sigma*tau*|L|^2 < 1 - tau/(2 beta)
* no coupling, no dual term -> FBHF, step interval (0, 4 beta / (1 + sqrt(1+16 beta^2 zeta^2)))
* no cocoercive term        -> relaxed rule tau*sigma*|L|^2 + tau^2 zeta^2 < 1

This script checks the reductions numerically (same iterates, to machine
precision) and prints the recovered step bounds.
"""

import numpy as np

from pdhf import (IterState, ProblemSpec, StepSizes, affine_cocoercive,
                  box_resolvent, check_step_conditions, condat_vu_epsilon,
                  condat_vu_step, fbhf_epsilon, fbhf_step, fbhf_step_bound,
                  l1_resolvent, linear_lipschitz, matrix_map, pdhf_step)

rng = np.random.default_rng(1)

# --- reduction 1: no Lipschitz term vs the dedicated two-line recursion
n, m = 12, 7
v = rng.standard_normal((n, n))
g_mat = np.eye(n) + v @ v.T / n
l_mat = rng.standard_normal((m, n)) / np.sqrt(n)
spec = ProblemSpec(
    primal_dim=n, dual_dim=m,
    resolvent=box_resolvent(n, -1, 1),
    dual_resolvent=l1_resolvent(m, 0.2),
    coupling=matrix_map(l_mat),
    cocoercive=affine_cocoercive(g_mat, rng.standard_normal(n)),
)
beta = spec.beta
tau = 0.8 * beta
eps = condat_vu_epsilon(tau, beta)
sigma = 0.9 * (1 - eps) / (tau * spec.coupling_norm ** 2)
steps = StepSizes(tau, sigma, eps)

a = IterState.initial(rng.standard_normal(n), rng.standard_normal(m))
b = IterState.initial(a.x, a.u)
gap = 0.0
for _ in range(200):
    a = pdhf_step(spec, steps, a)
    b = condat_vu_step(spec, steps, b)
    gap = max(gap, float(np.max(np.abs(a.x - b.x))), float(np.max(np.abs(a.u - b.u))))
print(f"general recursion vs Condat-Vu over 200 iterations: max gap {gap:.1e}")

# --- reduction 2: no coupling / dual term vs FBHF
r = rng.standard_normal((n, n))
s_mat = 0.7 * (r - r.T) / 2
spec2 = ProblemSpec(
    primal_dim=n,
    resolvent=box_resolvent(n, -1, 1),
    lipschitz=linear_lipschitz(s_mat),
    cocoercive=affine_cocoercive(g_mat, rng.standard_normal(n)),
)
bound = fbhf_step_bound(spec2.beta, spec2.zeta)
eps2 = fbhf_epsilon(spec2.beta, spec2.zeta)
steps2 = StepSizes(tau=0.95 * bound, sigma=1.0, epsilon=eps2)
a = IterState.initial(rng.standard_normal(n), np.zeros(0))
b = IterState.initial(a.x, a.u)
gap = 0.0
for _ in range(200):
    a = pdhf_step(spec2, steps2, a)
    b = fbhf_step(spec2, steps2, b)
    gap = max(gap, float(np.max(np.abs(a.x - b.x))))
print(f"general recursion vs FBHF over 200 iterations:      max gap {gap:.1e}")
print(f"forward-only step interval: (0, {bound:.6f}) "
      f"(epsilon choice {eps2:.6f} solves 2*beta*zeta*eps = sqrt(1-eps))")

# --- the admissible region, printed as a small table
print("\nstep validation across a (tau, sigma) slice "
      f"(beta={beta:.3f}, no Lipschitz term, |L|={spec.coupling_norm:.3f}):")
taus = [0.2 * beta, 0.8 * beta, 1.6 * beta]
sigmas = [0.2, 1.0, 3.0, 8.0]
header = "tau \\ sigma " + "".join(f"{s:>8.2f}" for s in sigmas)
print(header)
for t in taus:
    row = [f"{t:>11.3f}"]
    for s in sigmas:
        verdict = check_step_conditions(t, s, beta=beta, zeta=0.0,
                                        coupling_norm=spec.coupling_norm,
                                        epsilon=condat_vu_epsilon(t, beta))
        row.append(f"{'ok' if verdict.valid else '-':>8}")
    print("".join(row))
