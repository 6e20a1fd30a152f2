"""Self-contained demonstration problems with built-in oracles.

Each preset builds a small instance whose solution can be computed by
independent means (a dense linear solve, a first-order optimality
argument, or separability), runs the splitting on it, and reports the
error against that oracle.  The command-line runner and the test suite
share these builders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import matrix_map
from .prox import ResolventOp, affine_cocoercive, box_resolvent, l1_resolvent
from .saddle import SaddleProblem, run_saddle
from .blocks import BlockProblem, coupling_sq_bound, run_multivariate
from .solver import ProblemSpec, StepSizes, condat_vu_epsilon, run

__all__ = ["PRESET_NAMES", "PresetResult", "run_preset"]


@dataclass
class PresetResult:
    name: str
    description: str
    report: object
    oracle_error: float
    details: dict


def _identity_prox(dim):
    # resolvent of the scaled identity operator: v / (1 + t)
    return ResolventOp(dim, lambda t, v: v / (1.0 + t))


def _toy_qp_data(seed):
    rng = np.random.default_rng(seed)
    n, m = 10, 6
    v = rng.standard_normal((n, n))
    g_mat = np.eye(n) + v @ v.T / n
    r = rng.standard_normal(n)
    l_mat = rng.standard_normal((m, n)) / np.sqrt(n)
    return g_mat, r, l_mat


def toy_qp(seed=0, max_iters=30000, rel_pd_tol=1e-13, metrics_path=None):
    """Strongly convex quadratic with a quadratic dual term.

    Minimizes ``0.5 (x-r)' G (x-r) + 0.5 |L x|^2``; the optimality system
    is linear, so the oracle is one dense solve.
    """
    g_mat, r, l_mat = _toy_qp_data(seed)
    n = g_mat.shape[0]
    coupling = matrix_map(l_mat)
    spec = ProblemSpec(
        primal_dim=n,
        dual_dim=l_mat.shape[0],
        dual_resolvent=_identity_prox(l_mat.shape[0]),
        coupling=coupling,
        cocoercive=affine_cocoercive(g_mat, -g_mat @ r),
    )
    beta = spec.cocoercive.constant
    tau = 0.9 * beta
    eps = condat_vu_epsilon(tau, beta)
    sigma = 0.9 * (1.0 - eps) / (tau * coupling.norm_bound ** 2)
    steps = StepSizes(tau=tau, sigma=sigma, epsilon=eps)

    x_star = np.linalg.solve(g_mat + l_mat.T @ l_mat, g_mat @ r)
    report = run(spec, steps, max_iters=max_iters, rel_pd_tol=rel_pd_tol,
                 metrics_path=metrics_path)
    err = float(np.linalg.norm(report.x - x_star))
    return PresetResult(
        "toy-qp",
        "strongly convex quadratic with linear coupling vs dense-solve oracle",
        report, err, {"x_star": x_star, "steps": steps})


def bilinear_saddle(seed=0, max_iters=10000, rel_pd_tol=0.0, metrics_path=None):
    """Scalar bilinear game with unique saddle point at the origin."""
    sp = SaddleProblem(
        x_dim=1, y_dim=1,
        coupling_grad_x=lambda x, y: np.array(y, dtype=float),
        coupling_grad_y=lambda x, y: np.array(x, dtype=float),
        coupling_lipschitz=1.0,
    )
    steps = StepSizes(tau=0.7, sigma=1.0)
    report = run_saddle(sp, steps, x0=np.array([1.0]), y0=np.array([1.0]),
                        max_iters=max_iters, rel_pd_tol=rel_pd_tol,
                        metrics_path=metrics_path)
    err = float(np.linalg.norm(report.x))
    return PresetResult(
        "bilinear-saddle",
        "scalar bilinear game vs first-order-conditions oracle (origin)",
        report, err, {"steps": steps})


def _block_piece(rng, n, m):
    v = rng.standard_normal((n, n))
    g_mat = np.eye(n) + v @ v.T / n
    r = rng.standard_normal(n)
    l_mat = rng.standard_normal((m, n)) / np.sqrt(n)
    return g_mat, r, l_mat


def decoupled_blocks(seed=0, max_iters=3000, rel_pd_tol=0.0, metrics_path=None):
    """Two blocks with no cross coupling; the joint run must match two
    independent single-block runs."""
    rng = np.random.default_rng(seed)
    pieces = [_block_piece(rng, 6, 4), _block_piece(rng, 5, 3)]
    weight = 0.2

    problem = BlockProblem(
        primal_dims=[6, 5],
        dual_dims=[4, 3],
        resolvents=[box_resolvent(6, -2.0, 2.0), box_resolvent(5, -2.0, 2.0)],
        dual_resolvents=[l1_resolvent(4, weight), l1_resolvent(3, weight)],
        couplings={(0, 0): matrix_map(pieces[0][2]), (1, 1): matrix_map(pieces[1][2])},
        cocoercives=[affine_cocoercive(g, -g @ r) for g, r, _ in pieces],
    )
    beta = problem.min_cocoercivity()
    tau = 0.9 * beta
    eps = condat_vu_epsilon(tau, beta)
    sigma = 0.9 * (1.0 - eps) / (tau * coupling_sq_bound(problem))
    steps = StepSizes(tau=tau, sigma=sigma, epsilon=eps)

    report = run_multivariate(problem, steps, max_iters=max_iters,
                              rel_pd_tol=rel_pd_tol, metrics_path=metrics_path)

    # independent per-block runs, same steps
    deviation = 0.0
    offsets = [(0, 6), (6, 11)]
    dual_offsets = [(0, 4), (4, 7)]
    for idx, (g, r, l_mat) in enumerate(pieces):
        n = g.shape[0]
        spec = ProblemSpec(
            primal_dim=n,
            dual_dim=l_mat.shape[0],
            resolvent=box_resolvent(n, -2.0, 2.0),
            dual_resolvent=l1_resolvent(l_mat.shape[0], weight),
            coupling=matrix_map(l_mat),
            cocoercive=affine_cocoercive(g, -g @ r),
        )
        solo = run(spec, steps, max_iters=max_iters, rel_pd_tol=rel_pd_tol)
        a, b = offsets[idx]
        da, db = dual_offsets[idx]
        deviation = max(deviation,
                        float(np.max(np.abs(solo.x - report.x[a:b]))),
                        float(np.max(np.abs(solo.u - report.u[da:db]))))
    return PresetResult(
        "decoupled-blocks",
        "block-diagonal system vs independent per-block runs",
        report, deviation, {"steps": steps})


PRESET_NAMES = {
    "toy-qp": toy_qp,
    "bilinear-saddle": bilinear_saddle,
    "decoupled-blocks": decoupled_blocks,
}


def run_preset(name, **kwargs):
    """Run a named preset; raises KeyError for unknown names."""
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESET_NAMES)}")
    return PRESET_NAMES[name](**kwargs)
