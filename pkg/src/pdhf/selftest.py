"""Quick built-in consistency checks for the command-line self-test.

These mirror a few of the package's core identities at small sizes so a
broken install or a numerics regression is caught in well under a
second.  The full test suite is the authority; this is a smoke check.
"""

from __future__ import annotations

import math

import numpy as np

from .deblur import default_step_recipe
from .imaging import blur_map, gradient_map, haar_map
from .linops import adjoint_gap, identity_map
from .prox import ForwardOp, ResolventOp, l1_resolvent, resolvent_of_inverse
from .solver import (IterState, ProblemSpec, StepSizes, check_step_conditions,
                     fbhf_step_bound, pdhf_step)

__all__ = ["run_selftest"]


def _scalar_hand_instance():
    spec = ProblemSpec(
        primal_dim=1,
        dual_dim=1,
        dual_resolvent=ResolventOp(1, lambda t, v: np.zeros_like(v)),
        coupling=identity_map(1),
        lipschitz=ForwardOp(1, "lipschitz", 0.5, lambda x: 0.5 * x),
        cocoercive=ForwardOp(1, "cocoercive", 1.0, lambda x: x.copy()),
    )
    steps = StepSizes(tau=0.5, sigma=0.5, epsilon=0.5)
    state = IterState.initial(np.array([1.0]), np.array([1.0]))
    return pdhf_step(spec, steps, state)


def run_selftest():
    """Run the smoke checks; returns (name, ok, detail) triples."""
    checks = []
    rng = np.random.default_rng(0)

    gap = adjoint_gap(gradient_map(8, 8), n_probes=20, seed=1)
    checks.append(("gradient adjoint", gap <= 1e-10, f"max gap {gap:.2e}"))

    w = haar_map(16, 16, 2)
    x = rng.standard_normal(256)
    iso = abs(np.linalg.norm(w(x)) - np.linalg.norm(x)) / np.linalg.norm(x)
    rt = np.max(np.abs(w.adjoint(w(x)) - x))
    checks.append(("haar isometry", iso <= 1e-12, f"relative drift {iso:.2e}"))
    checks.append(("haar round trip", rt <= 1e-12, f"max error {rt:.2e}"))

    blur = blur_map(16, 16, 9, 4.0)
    const = np.full(256, 0.7)
    flat = np.max(np.abs(blur(const) - const))
    checks.append(("blur fixes constants", flat <= 1e-14, f"max error {flat:.2e}"))

    res = l1_resolvent(32, 0.3)
    v = rng.standard_normal(32)
    sigma = 0.7
    moreau = np.max(np.abs(resolvent_of_inverse(res, sigma, v)
                           + sigma * res(1.0 / sigma, v / sigma) - v))
    checks.append(("Moreau identity", moreau <= 1e-12, f"max error {moreau:.2e}"))

    new = _scalar_hand_instance()
    expected = (0.5, -0.25, -0.3125, 0.40625, 0.0625)
    got = (float(new.p[0]), float(new.z[0]), float(new.q[0]),
           float(new.u[0]), float(new.x[0]))
    worst = max(abs(a - b) for a, b in zip(expected, got))
    checks.append(("scalar recursion values", worst <= 1e-12, f"max error {worst:.2e}"))

    bound = fbhf_step_bound(1.0, 1.0)
    ref = 4.0 / (1.0 + math.sqrt(17.0))
    checks.append(("forward-only step bound", abs(bound - ref) <= 1e-12,
                   f"{bound!r} vs {ref!r}"))

    steps, _ = default_step_recipe(beta=1.0, zeta=0.1, coupling_norm=math.sqrt(8.0))
    verdict = check_step_conditions(steps.tau, steps.sigma, beta=1.0, zeta=0.1,
                                    coupling_norm=math.sqrt(8.0), epsilon=steps.epsilon)
    checks.append(("benchmark step recipe", verdict.valid,
                   f"tau={steps.tau:.6g} sigma={steps.sigma:.6g}"))

    return checks
