"""Matrix-free linear operators on flat real vectors.

A :class:`LinearMap` bundles a forward map, its adjoint, and a certified
upper bound on the operator norm.  The bound is what step-size rules
consume, so it must hold for every input, not just on average.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "LinearMap",
    "adjoint_gap",
    "as_vector",
    "identity_map",
    "linearity_gap",
    "matrix_map",
    "power_iteration_norm",
]


def as_vector(x, dim=None, name="vector"):
    """Coerce ``x`` to a 1-D float64 array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {dim}")
    return v


class LinearMap:
    """Matrix-free linear operator between flat real vector spaces.

    Parameters
    ----------
    in_dim, out_dim : int
        Domain and codomain dimensions.
    apply : callable
        Forward evaluation, 1-D array in, 1-D array out.
    adjoint_apply : callable
        Adjoint evaluation, satisfying ``<apply(x), u> == <x, adjoint_apply(u)>``.
    norm_bound : float
        Certified upper bound on the operator norm:
        ``norm(apply(x)) <= norm_bound * norm(x)`` for all ``x``.
    """

    __slots__ = ("in_dim", "out_dim", "norm_bound", "_apply", "_adjoint")

    def __init__(self, in_dim, out_dim, apply, adjoint_apply, norm_bound):
        if in_dim < 1 or out_dim < 1:
            raise ValueError("operator dimensions must be positive")
        if not math.isfinite(norm_bound) or norm_bound < 0:
            raise ValueError("norm_bound must be finite and nonnegative")
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.norm_bound = float(norm_bound)
        self._apply = apply
        self._adjoint = adjoint_apply

    def __call__(self, x):
        return self._apply(x)

    def adjoint(self, u):
        return self._adjoint(u)

    def __repr__(self):
        return (f"LinearMap(in_dim={self.in_dim}, out_dim={self.out_dim}, "
                f"norm_bound={self.norm_bound!r})")


def identity_map(dim):
    """Identity operator with exact norm bound 1."""
    return LinearMap(dim, dim,
                     lambda x: np.array(x, dtype=float),
                     lambda u: np.array(u, dtype=float),
                     1.0)


def matrix_map(m, norm_bound=None):
    """Wrap a dense matrix as a LinearMap.

    When ``norm_bound`` is omitted the exact spectral norm is computed,
    which is affordable at the dense sizes this library targets.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("matrix_map expects a 2-D array")
    if norm_bound is None:
        norm_bound = float(np.linalg.norm(m, 2))
    return LinearMap(m.shape[1], m.shape[0],
                     lambda x: m @ x,
                     lambda u: m.T @ u,
                     norm_bound)


def power_iteration_norm(lin, iters=100, seed=0):
    """Estimate the operator norm of ``lin`` by power iteration.

    Runs power iteration on the self-adjoint composition of ``lin`` with
    its adjoint and reports the square root of the Rayleigh quotient.
    The estimate is deterministic for a fixed seed, nondecreasing in the
    iteration count, and never exceeds the true norm.

    Parameters
    ----------
    lin : LinearMap
    iters : int
        Number of applications of the normal operator; at least 1.
    seed : int
        Seed for the random start vector.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(lin.in_dim)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = lin.adjoint(lin(v))
        # Rayleigh quotient of the normal operator at the unit vector v.
        est = math.sqrt(max(float(v @ w), 0.0))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return est


def adjoint_gap(lin, n_probes=50, seed=0):
    """Worst relative mismatch of the adjoint identity over random probes.

    Returns ``max |<Lx, u> - <x, L*u>| / scale`` over ``n_probes`` seeded
    pairs, where ``scale`` guards against cancellation at tiny magnitudes.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    tiny = np.finfo(float).tiny
    for _ in range(n_probes):
        x = rng.standard_normal(lin.in_dim)
        u = rng.standard_normal(lin.out_dim)
        lx = lin(x)
        au = lin.adjoint(u)
        lhs = float(lx @ u)
        rhs = float(x @ au)
        scale = max(np.linalg.norm(lx) * np.linalg.norm(u),
                    np.linalg.norm(x) * np.linalg.norm(au), tiny)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def linearity_gap(lin, n_probes=20, seed=0):
    """Worst relative violation of additivity and homogeneity on probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    tiny = np.finfo(float).tiny
    for _ in range(n_probes):
        x = rng.standard_normal(lin.in_dim)
        y = rng.standard_normal(lin.in_dim)
        a, b = rng.standard_normal(2)
        lhs = lin(a * x + b * y)
        rhs = a * lin(x) + b * lin(y)
        scale = max(float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)), tiny)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    return worst
