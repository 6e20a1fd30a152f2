"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the package's solver paths: scalar
proxes are checked against a grid-plus-golden-section minimizer, the
structured inclusion against a manufactured solution verified by
normal-cone residuals and against a separate forward-backward-forward
iteration written on raw matrices.
"""

import math

import numpy as np

from pdhf.linops import matrix_map
from pdhf.prox import (affine_cocoercive, box_resolvent, l1_resolvent,
                       linear_lipschitz, linear_resolvent,
                       resolvent_of_inverse)
from pdhf.solver import (OracleSolution, ProblemSpec, StepSizes,
                         fbhf_epsilon, fbhf_step_bound)

__all__ = [
    "fbf_product_oracle",
    "golden_min",
    "literal_block_recursion",
    "lyapunov_instance",
    "make_cv_problem",
    "make_fbhf_problem",
    "make_full_problem",
    "manufactured_inclusion",
    "membership_residual",
    "prox_scalar_oracle",
    "random_psd",
    "random_skew",
]


# ---------------------------------------------------------------------------
# scalar minimization oracle

def golden_min(f, lo, hi, tol=1e-12):
    """Golden-section minimizer for a unimodal scalar function."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def prox_scalar_oracle(penalty, v, span=10.0):
    """Brute-force prox of a scalar penalty: coarse grid then refinement."""

    def obj(y):
        return penalty(y) + 0.5 * (y - v) ** 2

    grid = np.linspace(v - span, v + span, 2001)
    best = grid[int(np.argmin([obj(y) for y in grid]))]
    width = span / 1000.0
    return golden_min(obj, best - 2 * width, best + 2 * width)


# ---------------------------------------------------------------------------
# random matrices

def random_psd(rng, n, shift=1.0):
    v = rng.standard_normal((n, n))
    return shift * np.eye(n) + v @ v.T / n


def random_skew(rng, n, scale=1.0):
    r = rng.standard_normal((n, n))
    return scale * (r - r.T) / 2.0


# ---------------------------------------------------------------------------
# seeded problem builders

def make_cv_problem(seed, n=20, m=12):
    """Random instance without the Lipschitz term, with validated steps."""
    rng = np.random.default_rng(seed)
    g_mat = random_psd(rng, n)
    r = rng.standard_normal(n)
    l_mat = rng.standard_normal((m, n)) / math.sqrt(n)
    coupling = matrix_map(l_mat)
    spec = ProblemSpec(
        primal_dim=n, dual_dim=m,
        resolvent=l1_resolvent(n, float(rng.uniform(0.05, 0.5))),
        dual_resolvent=l1_resolvent(m, float(rng.uniform(0.05, 0.5))),
        coupling=coupling,
        cocoercive=affine_cocoercive(g_mat, -g_mat @ r),
    )
    beta = spec.cocoercive.constant
    eps = 0.4
    tau = 0.9 * 2.0 * beta * eps
    sigma = 0.9 * (1.0 - eps) / (tau * coupling.norm_bound ** 2)
    return spec, StepSizes(tau, sigma, eps)


def make_fbhf_problem(seed, n=20):
    """Random instance without coupling and dual term."""
    rng = np.random.default_rng(seed)
    g_mat = random_psd(rng, n)
    r = rng.standard_normal(n)
    s_mat = random_skew(rng, n, scale=0.8)
    lip = linear_lipschitz(s_mat)
    coco = affine_cocoercive(g_mat, -g_mat @ r)
    eps = fbhf_epsilon(coco.constant, lip.constant)
    tau = 0.95 * fbhf_step_bound(coco.constant, lip.constant)
    return ProblemSpec(
        primal_dim=n,
        resolvent=box_resolvent(n, -1.0, 1.0),
        lipschitz=lip,
        cocoercive=coco,
    ), StepSizes(tau, 1.0, eps)


def make_full_problem(seed, n=20, m=12):
    """Random instance with all five terms and validated steps."""
    rng = np.random.default_rng(seed)
    g_mat = random_psd(rng, n)
    r = rng.standard_normal(n)
    s_mat = random_skew(rng, n, scale=0.6)
    l_mat = rng.standard_normal((m, n)) / math.sqrt(n)
    coupling = matrix_map(l_mat)
    lip = linear_lipschitz(s_mat)
    coco = affine_cocoercive(g_mat, -g_mat @ r)
    spec = ProblemSpec(
        primal_dim=n, dual_dim=m,
        resolvent=box_resolvent(n, -1.5, 1.5),
        dual_resolvent=l1_resolvent(m, 0.3),
        coupling=coupling,
        lipschitz=lip,
        cocoercive=coco,
    )
    eps = 0.3
    beta, zeta = coco.constant, lip.constant
    tau = 0.9 * min(2.0 * beta * eps, math.sqrt(0.5 * (1.0 - eps)) / zeta)
    sigma = 0.9 * (1.0 - eps - (tau * zeta) ** 2) / (tau * coupling.norm_bound ** 2)
    return spec, StepSizes(tau, sigma, eps)


def lyapunov_instance(seed, n=10, m=6):
    """Fully linear instance whose solution is one dense solve.

    Returns (spec, steps, oracle); the oracle solves the stationarity
    system of the quadratic-plus-skew structure exactly.
    """
    rng = np.random.default_rng(seed)
    p_mat = random_psd(rng, n)
    q_mat = random_psd(rng, m)
    g_mat = random_psd(rng, n)
    g_vec = rng.standard_normal(n)
    s_mat = random_skew(rng, n, scale=0.5)
    l_mat = rng.standard_normal((m, n)) / math.sqrt(n)
    coupling = matrix_map(l_mat)
    lip = linear_lipschitz(s_mat)
    coco = affine_cocoercive(g_mat, g_vec)
    spec = ProblemSpec(
        primal_dim=n, dual_dim=m,
        resolvent=linear_resolvent(p_mat),
        dual_resolvent=linear_resolvent(q_mat),
        coupling=coupling,
        lipschitz=lip,
        cocoercive=coco,
    )
    eps = 0.3
    beta, zeta = coco.constant, lip.constant
    tau = 0.9 * min(2.0 * beta * eps, math.sqrt(0.5 * (1.0 - eps)) / zeta)
    sigma = 0.9 * (1.0 - eps - (tau * zeta) ** 2) / (tau * coupling.norm_bound ** 2)

    x_star = -np.linalg.solve(p_mat + s_mat + g_mat + l_mat.T @ q_mat @ l_mat, g_vec)
    u_star = q_mat @ (l_mat @ x_star)
    return spec, StepSizes(tau, sigma, eps), OracleSolution(x_star, u_star)


# ---------------------------------------------------------------------------
# manufactured inclusion with skew term: exact solution by construction

def manufactured_inclusion(seed, n=10, m=8, lam=0.3):
    """Box + weighted-l1-through-a-matrix + skew + strongly convex quadratic.

    The affine offset of the quadratic is chosen so a preselected
    interior point solves the inclusion exactly; strong monotonicity
    makes that primal solution unique.  Returns
    (spec, steps, x_star, u_star, mats) where mats carries the raw
    pieces for independent verification.
    """
    rng = np.random.default_rng(seed)
    g_mat = random_psd(rng, n)
    s_mat = random_skew(rng, n, scale=0.5)
    l_mat = rng.standard_normal((m, n)) / math.sqrt(n)

    x_star = 0.5 * np.tanh(rng.standard_normal(n))
    w = l_mat @ x_star
    assert np.all(w != 0.0)
    u_star = lam * np.sign(w)
    g_vec = -(s_mat @ x_star + g_mat @ x_star + l_mat.T @ u_star)

    coupling = matrix_map(l_mat)
    lip = linear_lipschitz(s_mat)
    coco = affine_cocoercive(g_mat, g_vec)
    spec = ProblemSpec(
        primal_dim=n, dual_dim=m,
        resolvent=box_resolvent(n, -1.0, 1.0),
        dual_resolvent=l1_resolvent(m, lam),
        coupling=coupling,
        lipschitz=lip,
        cocoercive=coco,
    )
    eps = 0.3
    beta, zeta = coco.constant, lip.constant
    tau = 0.9 * min(2.0 * beta * eps, math.sqrt(0.5 * (1.0 - eps)) / zeta)
    sigma = 0.9 * (1.0 - eps - (tau * zeta) ** 2) / (tau * coupling.norm_bound ** 2)
    mats = {"g_mat": g_mat, "g_vec": g_vec, "s_mat": s_mat, "l_mat": l_mat,
            "lam": lam, "lo": -1.0, "hi": 1.0}
    return spec, StepSizes(tau, sigma, eps), x_star, u_star, mats


def membership_residual(mats, x, u):
    """Natural residuals of the two inclusion conditions, raw-matrix form."""
    forward = (mats["s_mat"] + mats["g_mat"]) @ x + mats["g_vec"] + mats["l_mat"].T @ u
    primal = x - np.clip(x - forward, mats["lo"], mats["hi"])
    dual = u - np.clip(u + mats["l_mat"] @ x, -mats["lam"], mats["lam"])
    return max(float(np.linalg.norm(primal)), float(np.linalg.norm(dual)))


def fbf_product_oracle(mats, iters=200000, seed=1):
    """Independent forward-backward-forward run on the product space.

    Uses only raw numpy pieces: the single-valued part stacks the
    monotone affine term with the skew primal-dual coupling, the
    set-valued part projects onto the box and the dual interval.
    """
    n = mats["g_mat"].shape[0]
    m = mats["l_mat"].shape[0]
    big = np.zeros((n + m, n + m))
    big[:n, :n] = mats["s_mat"] + mats["g_mat"]
    big[:n, n:] = mats["l_mat"].T
    big[n:, :n] = -mats["l_mat"]
    gamma = 0.9 / float(np.linalg.norm(big, 2))
    shift = np.concatenate([mats["g_vec"], np.zeros(m)])

    def forward(wv):
        return big @ wv + shift

    def backward(wv):
        out = wv.copy()
        out[:n] = np.clip(out[:n], mats["lo"], mats["hi"])
        out[n:] = np.clip(out[n:], -mats["lam"], mats["lam"])
        return out

    rng = np.random.default_rng(seed)
    wv = 0.1 * rng.standard_normal(n + m)
    for _ in range(iters):
        fw = forward(wv)
        mid = backward(wv - gamma * fw)
        wv = mid - gamma * (forward(mid) - fw)
    return wv[:n], wv[n:]


# ---------------------------------------------------------------------------
# literal block recursion (independent of the assembled code path)

def literal_block_recursion(problem, steps, n_iters, x0=None, u0=None):
    """Nested per-block recursion; yields concatenated (x, u) per iteration.

    Couplings are visited in dictionary insertion order so float
    accumulation matches the stacked operators bit for bit.
    """
    tau, sigma = steps.tau, steps.sigma
    n_primal, n_dual = problem.n_primal, problem.n_dual
    xs = ([np.zeros(d) for d in problem.primal_dims] if x0 is None
          else [np.array(b, dtype=float) for b in x0])
    us = ([np.zeros(d) for d in problem.dual_dims] if u0 is None
          else [np.array(b, dtype=float) for b in u0])

    for _ in range(n_iters):
        if problem.lipschitz is not None:
            pcat = problem.lipschitz(np.concatenate(xs))
            ps, off = [], 0
            for d in problem.primal_dims:
                ps.append(pcat[off:off + d])
                off += d
        else:
            ps = None

        zs = []
        for i in range(n_primal):
            g = np.zeros(problem.primal_dims[i])
            for (i2, k2), lin in problem.couplings.items():
                if i2 == i:
                    g += lin.adjoint(us[k2])
            if ps is not None:
                g += ps[i]
            if problem.cocoercives[i] is not None:
                g += problem.cocoercives[i](xs[i])
            v = xs[i] - tau * g
            res = problem.resolvents[i]
            zs.append(res(tau, v) if res is not None else v)

        if ps is not None:
            czcat = problem.lipschitz(np.concatenate(zs))
            qs, off = [], 0
            for i, d in enumerate(problem.primal_dims):
                qs.append(tau * (czcat[off:off + d] - ps[i]))
                off += d
        else:
            qs = [np.zeros_like(z) for z in zs]

        new_us = []
        for k in range(n_dual):
            if problem.dual_resolvents[k] is None:
                new_us.append(np.zeros(problem.dual_dims[k]))
                continue
            acc = np.zeros(problem.dual_dims[k])
            for (i2, k2), lin in problem.couplings.items():
                if k2 == k:
                    acc += lin(2.0 * zs[i2] - xs[i2] - qs[i2])
            w = us[k] + sigma * acc
            new_us.append(resolvent_of_inverse(problem.dual_resolvents[k], sigma, w))

        xs = [zs[i] - qs[i] for i in range(n_primal)]
        us = new_us
        yield np.concatenate(xs), (np.concatenate(us) if us else np.zeros(0))
