"""Operator vocabulary for the splitting solvers.

Set-valued terms enter through their resolvents (:class:`ResolventOp`),
single-valued forward terms through :class:`ForwardOp` with a certified
Lipschitz or cocoercivity constant.  Conjugate resolvents are always
derived through the Moreau identity (:func:`resolvent_of_inverse`), so
callers never implement them by hand.
"""

from __future__ import annotations

import numpy as np

from .linops import as_vector

__all__ = [
    "ForwardOp",
    "ResolventOp",
    "affine_cocoercive",
    "box_resolvent",
    "cocoercivity_violation",
    "huber_gradient",
    "huber_value",
    "l1_resolvent",
    "linear_lipschitz",
    "linear_resolvent",
    "lipschitz_violation",
    "prox_box",
    "prox_l1",
    "quadratic_data_gradient",
    "quadratic_data_term",
    "resolvent_nonexpansiveness_violation",
    "resolvent_of_inverse",
]


class ResolventOp:
    """A set-valued operator exposed through its resolvent.

    ``resolve(step, v)`` must evaluate the resolvent of ``step`` times
    the underlying operator at ``v``.  ``rho`` is the monotonicity
    modulus of the operator (0 for plain monotone, negative moduli are
    accepted for user-supplied resolvents); single-valuedness requires
    ``step * rho > -1``, which is checked before every call.
    """

    __slots__ = ("dim", "rho", "_resolve")

    def __init__(self, dim, resolve, rho=0.0):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.rho = float(rho)
        self._resolve = resolve

    def __call__(self, step, v):
        if step <= 0:
            raise ValueError("resolvent step must be positive")
        if step * self.rho <= -1.0:
            raise ValueError(
                f"resolvent not single valued: step*rho = {step * self.rho} <= -1")
        return self._resolve(step, v)

    def __repr__(self):
        return f"ResolventOp(dim={self.dim}, rho={self.rho!r})"


class ForwardOp:
    """Single-valued operator with a certified constant.

    ``kind`` is ``"lipschitz"`` (constant is the Lipschitz modulus) or
    ``"cocoercive"`` (constant is the cocoercivity modulus).  The
    constant must be positive; zero operators are encoded by omitting
    the term, not by a zero constant.
    """

    __slots__ = ("dim", "kind", "constant", "_apply")

    KINDS = ("lipschitz", "cocoercive")

    def __init__(self, dim, kind, constant, apply):
        if dim < 1:
            raise ValueError("dim must be positive")
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        if not constant > 0:
            raise ValueError("constant must be positive")
        self.dim = int(dim)
        self.kind = kind
        self.constant = float(constant)
        self._apply = apply

    def __call__(self, x):
        return self._apply(x)

    def __repr__(self):
        return f"ForwardOp(dim={self.dim}, kind={self.kind!r}, constant={self.constant!r})"


# ---------------------------------------------------------------------------
# scalar building blocks

def prox_l1(v, weight, step=1.0):
    """Soft threshold: componentwise ``sign(v) * max(|v| - step*weight, 0)``."""
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    thr = step * weight
    return np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)


def prox_box(v, lo, hi):
    """Componentwise clamp to [lo, hi]; independent of the prox step."""
    if np.any(np.asarray(lo) > np.asarray(hi)):
        raise ValueError("box bounds require lo <= hi")
    return np.clip(v, lo, hi)


def resolvent_of_inverse(res, sigma, w):
    """Resolvent of ``sigma`` times the inverse operator, via Moreau.

    Computes ``w - sigma * resolve(1/sigma, w/sigma)``, which realizes
    the conjugate resolvent exactly from the resolvent of the operator
    itself.  Requires a plain monotone operator (``rho == 0``).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if res.rho != 0.0:
        raise ValueError("Moreau decomposition requires a monotone operator (rho == 0)")
    return w - sigma * res(1.0 / sigma, w / sigma)


def huber_value(x, delta):
    """Sum of componentwise Huber values: quadratic inside [-delta, delta],
    affine with slope 1 outside."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    vals = np.where(ax <= delta, x * x / (2.0 * delta), ax - delta / 2.0)
    return float(vals.sum())


def huber_gradient(x, delta):
    """Componentwise derivative of the Huber function; (1/delta)-Lipschitz."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= delta, x / delta, np.sign(x))


def quadratic_data_gradient(t_map, z, x):
    """Gradient of the half squared residual through ``t_map`` at ``x``.

    Returns the adjoint of ``t_map`` applied to ``t_map(x) - z``; the
    gradient is cocoercive with modulus one over the squared norm bound
    of ``t_map``.
    """
    z = as_vector(z, t_map.out_dim, name="data")
    x = as_vector(x, t_map.in_dim, name="point")
    return t_map.adjoint(t_map(x) - z)


def quadratic_data_term(t_map, z):
    """Package :func:`quadratic_data_gradient` as a cocoercive ForwardOp."""
    z = as_vector(z, t_map.out_dim, name="data")
    if t_map.norm_bound <= 0:
        raise ValueError("t_map needs a positive norm bound")
    beta = 1.0 / (t_map.norm_bound ** 2)
    return ForwardOp(t_map.in_dim, "cocoercive", beta,
                     lambda x: t_map.adjoint(t_map(x) - z))


# ---------------------------------------------------------------------------
# resolvent factories

def l1_resolvent(dim, weight):
    """Resolvent of the subdifferential of a weighted l1 norm."""
    return ResolventOp(dim, lambda t, v: prox_l1(v, weight, t))


def box_resolvent(dim, lo, hi):
    """Resolvent of the normal cone of a box (projection, step independent)."""
    if np.any(np.asarray(lo) > np.asarray(hi)):
        raise ValueError("box bounds require lo <= hi")
    return ResolventOp(dim, lambda t, v: prox_box(v, lo, hi))


def linear_resolvent(mat, rho=0.0):
    """Resolvent of a linear operator given by a dense matrix.

    Each distinct step triggers one LU factorization, cached since the
    solvers use a constant step throughout a run.
    """
    from scipy.linalg import lu_factor, lu_solve

    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("linear_resolvent expects a square matrix")
    n = mat.shape[0]
    eye = np.eye(n)
    cache = {}

    def resolve(t, v):
        key = float(t)
        if key not in cache:
            cache[key] = lu_factor(eye + key * mat)
        return lu_solve(cache[key], v)

    return ResolventOp(n, resolve, rho=rho)


def affine_cocoercive(mat, offset=None, beta=None):
    """Cocoercive forward operator ``x -> mat @ x + offset``.

    ``mat`` must be positive semidefinite symmetric; by default the
    cocoercivity modulus is one over its spectral norm.
    """
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    if offset is None:
        offset = np.zeros(n)
    offset = as_vector(offset, n, name="offset")
    if beta is None:
        beta = 1.0 / float(np.linalg.norm(mat, 2))
    return ForwardOp(n, "cocoercive", beta, lambda x: mat @ x + offset)


def linear_lipschitz(mat, constant=None):
    """Lipschitz forward operator ``x -> mat @ x`` (e.g. a skew matrix)."""
    mat = np.asarray(mat, dtype=float)
    if constant is None:
        constant = float(np.linalg.norm(mat, 2))
    return ForwardOp(mat.shape[0], "lipschitz", constant, lambda x: mat @ x)


# ---------------------------------------------------------------------------
# seed-controlled probes (debug-mode checks, not used on solve paths)

def lipschitz_violation(op, n_pairs=200, seed=0):
    """Worst relative excess of ``|Tx - Ty|`` over ``constant * |x - y|``."""
    rng = np.random.default_rng(seed)
    tiny = np.finfo(float).tiny
    worst = -np.inf
    for _ in range(n_pairs):
        x = rng.standard_normal(op.dim)
        y = rng.standard_normal(op.dim)
        lhs = float(np.linalg.norm(op(x) - op(y)))
        rhs = op.constant * float(np.linalg.norm(x - y))
        worst = max(worst, (lhs - rhs) / max(rhs, tiny))
    return worst


def cocoercivity_violation(op, n_pairs=200, seed=0):
    """Worst relative excess of ``beta * |Tx-Ty|^2`` over ``<x-y, Tx-Ty>``."""
    rng = np.random.default_rng(seed)
    tiny = np.finfo(float).tiny
    worst = -np.inf
    for _ in range(n_pairs):
        x = rng.standard_normal(op.dim)
        y = rng.standard_normal(op.dim)
        d = op(x) - op(y)
        lhs = op.constant * float(d @ d)
        rhs = float((x - y) @ d)
        worst = max(worst, (lhs - rhs) / max(abs(rhs), tiny))
    return worst


def resolvent_nonexpansiveness_violation(res, step, n_pairs=200, seed=0):
    """Worst relative excess of resolvent displacement over input distance.

    Meaningful for ``rho >= 0``, where resolvents are nonexpansive.
    """
    rng = np.random.default_rng(seed)
    tiny = np.finfo(float).tiny
    worst = -np.inf
    for _ in range(n_pairs):
        x = rng.standard_normal(res.dim)
        y = rng.standard_normal(res.dim)
        lhs = float(np.linalg.norm(res(step, x) - res(step, y)))
        rhs = float(np.linalg.norm(x - y))
        worst = max(worst, (lhs - rhs) / max(rhs, tiny))
    return worst
