"""Block-structured inclusions on product spaces.

A :class:`BlockProblem` holds one set-valued term and one cocoercive
term per primal block, one set-valued term per dual block, a sparse
grid of linear couplings between them, and an optional Lipschitz term
acting on the whole primal product (block coupling is what makes it
interesting).  :func:`assemble` stacks everything into a single
:class:`~pdhf.solver.ProblemSpec` whose coupling carries the certified
bound ``sqrt(coupling_sq_bound)``.

Problems can also be described in a key=value file with one section per
block and per coupling (see :func:`load_block_problem`), built from a
small vocabulary of named operator presets; the command line uses this
to run coupled systems without writing code.
"""

from __future__ import annotations

import ast
import configparser
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .linops import LinearMap, matrix_map
from .prox import (ForwardOp, ResolventOp, affine_cocoercive, box_resolvent,
                   l1_resolvent)
from .solver import ProblemSpec, run

__all__ = [
    "BlockProblem",
    "BlockVector",
    "assemble",
    "blockdiag_forward",
    "coupling_sq_bound",
    "default_block_steps",
    "load_block_problem",
    "run_multivariate",
]


@dataclass
class BlockVector:
    """A list of per-block vectors with concat/split helpers."""

    blocks: list

    def __post_init__(self):
        self.blocks = [np.asarray(b, dtype=float) for b in self.blocks]

    @property
    def dims(self):
        return [b.shape[0] for b in self.blocks]

    @property
    def total_dim(self):
        return sum(self.dims)

    def concat(self):
        return np.concatenate(self.blocks) if self.blocks else np.zeros(0)

    @classmethod
    def split(cls, vec, dims):
        vec = np.asarray(vec, dtype=float)
        if vec.shape[0] != sum(dims):
            raise ValueError("vector length does not match block dims")
        out, off = [], 0
        for d in dims:
            out.append(vec[off:off + d])
            off += d
        return cls(out)


def _offsets(dims):
    off, out = 0, []
    for d in dims:
        out.append((off, off + d))
        off += d
    return out


@dataclass
class BlockProblem:
    """Coupled system data.

    ``couplings`` maps a (primal index, dual index) pair to a LinearMap;
    absent pairs are zero couplings and are never materialized.
    ``lipschitz`` acts on the full primal product space.
    """

    primal_dims: list
    dual_dims: list
    resolvents: list = None
    dual_resolvents: list = None
    couplings: dict = field(default_factory=dict)
    cocoercives: list = None
    lipschitz: ForwardOp | None = None

    def __post_init__(self):
        ni, nk = len(self.primal_dims), len(self.dual_dims)
        if ni < 1:
            raise ValueError("need at least one primal block")
        if self.resolvents is None:
            self.resolvents = [None] * ni
        if self.dual_resolvents is None:
            self.dual_resolvents = [None] * nk
        if self.cocoercives is None:
            self.cocoercives = [None] * ni
        if len(self.resolvents) != ni or len(self.cocoercives) != ni:
            raise ValueError("per-primal-block lists must have one entry per block")
        if len(self.dual_resolvents) != nk:
            raise ValueError("per-dual-block list must have one entry per block")
        for i, res in enumerate(self.resolvents):
            if res is not None and res.dim != self.primal_dims[i]:
                raise ValueError(f"primal resolvent {i} dimension mismatch")
        for k, res in enumerate(self.dual_resolvents):
            if res is not None and res.dim != self.dual_dims[k]:
                raise ValueError(f"dual resolvent {k} dimension mismatch")
        for i, coco in enumerate(self.cocoercives):
            if coco is not None:
                if coco.dim != self.primal_dims[i]:
                    raise ValueError(f"cocoercive term {i} dimension mismatch")
                if coco.kind != "cocoercive":
                    raise ValueError(f"block term {i} must be cocoercive")
        for (i, k), lin in self.couplings.items():
            if not (0 <= i < ni and 0 <= k < nk):
                raise ValueError(f"coupling index ({i},{k}) out of range")
            if lin.in_dim != self.primal_dims[i] or lin.out_dim != self.dual_dims[k]:
                raise ValueError(f"coupling ({i},{k}) dimension mismatch")
        if self.lipschitz is not None:
            if self.lipschitz.dim != sum(self.primal_dims):
                raise ValueError("lipschitz term must act on the full primal product")
            if self.lipschitz.kind != "lipschitz":
                raise ValueError("full-space term must have kind 'lipschitz'")

    @property
    def n_primal(self):
        return len(self.primal_dims)

    @property
    def n_dual(self):
        return len(self.dual_dims)

    def min_cocoercivity(self):
        """Smallest per-block cocoercivity constant, or None if none act."""
        consts = [c.constant for c in self.cocoercives if c is not None]
        return min(consts) if consts else None


def coupling_sq_bound(problem):
    """Certified bound on the squared norm of the stacked coupling:
    sum over dual blocks of (sum of per-pair norm bounds)^2.

    Uses the certified per-pair bounds, so validity stays deterministic
    and conservative.
    """
    total = 0.0
    for k in range(problem.n_dual):
        row = sum(problem.couplings[(i, k)].norm_bound
                  for i in range(problem.n_primal) if (i, k) in problem.couplings)
        total += row * row
    return total


def blockdiag_forward(ops, dims, kind=None):
    """Stack per-block forward operators into one on the product space.

    ``None`` entries contribute zeros.  For kind ``"lipschitz"`` the
    stacked constant is the max of the block constants, for
    ``"cocoercive"`` the min.
    """
    present = [op for op in ops if op is not None]
    if not present:
        return None
    if kind is None:
        kind = present[0].kind
    if any(op.kind != kind for op in present):
        raise ValueError("mixed forward kinds in one stack")
    spans = _offsets(dims)

    def apply(x):
        out = np.zeros_like(x)
        for op, (a, b) in zip(ops, spans):
            if op is not None:
                out[a:b] = op(x[a:b])
        return out

    consts = [op.constant for op in present]
    constant = max(consts) if kind == "lipschitz" else min(consts)
    return ForwardOp(sum(dims), kind, constant, apply)


def _block_resolvent(res_list, dims):
    if all(r is None for r in res_list):
        return None
    spans = _offsets(dims)

    def resolve(t, v):
        out = np.empty_like(v)
        for res, (a, b) in zip(res_list, spans):
            out[a:b] = v[a:b] if res is None else res(t, v[a:b])
        return out

    rho = min((r.rho for r in res_list if r is not None), default=0.0)
    rho = min(rho, 0.0) if any(r is None for r in res_list) else rho
    return ResolventOp(sum(dims), resolve, rho=rho)


def _stacked_coupling(problem):
    if not problem.couplings:
        return None
    pspans = _offsets(problem.primal_dims)
    dspans = _offsets(problem.dual_dims)
    by_dual = {k: [] for k in range(problem.n_dual)}
    by_primal = {i: [] for i in range(problem.n_primal)}
    for (i, k), lin in problem.couplings.items():
        by_dual[k].append((i, lin))
        by_primal[i].append((k, lin))

    def apply(x):
        out = np.zeros(sum(problem.dual_dims))
        for k, (a, b) in enumerate(dspans):
            for i, lin in by_dual[k]:
                pa, pb = pspans[i]
                out[a:b] += lin(x[pa:pb])
        return out

    def adjoint(u):
        out = np.zeros(sum(problem.primal_dims))
        for i, (a, b) in enumerate(pspans):
            for k, lin in by_primal[i]:
                da, db = dspans[k]
                out[a:b] += lin.adjoint(u[da:db])
        return out

    return LinearMap(sum(problem.primal_dims), sum(problem.dual_dims),
                     apply, adjoint, math.sqrt(coupling_sq_bound(problem)))


def assemble(problem):
    """Stack a BlockProblem into one ProblemSpec on the product spaces.

    Resolvents act blockwise, the stacked coupling sums per-dual-block
    contributions, the cocoercive stack carries the min block constant.
    """
    return ProblemSpec(
        primal_dim=sum(problem.primal_dims),
        dual_dim=sum(problem.dual_dims),
        resolvent=_block_resolvent(problem.resolvents, problem.primal_dims),
        dual_resolvent=_block_resolvent(problem.dual_resolvents, problem.dual_dims),
        coupling=_stacked_coupling(problem),
        lipschitz=problem.lipschitz,
        cocoercive=blockdiag_forward(problem.cocoercives, problem.primal_dims,
                                     kind="cocoercive"),
    )


def run_multivariate(problem, steps, x0=None, u0=None, **run_kwargs):
    """Solve the coupled system by running the core driver on the
    assembled spec; the step rule then uses the certified bound
    ``coupling_sq_bound`` in place of the exact squared coupling norm."""
    spec = assemble(problem)
    return run(spec, steps, x0=x0, u0=u0, **run_kwargs)


def default_block_steps(problem, epsilon=0.3, safety=0.9):
    """Conservative validated steps from the certified block constants.

    Uses the min block cocoercivity for the primal step and the
    certified coupling bound for the dual step; with no cocoercive
    term the relaxed rule (bound 1) applies and epsilon is unused.
    """
    from .solver import StepSizes

    beta = problem.min_cocoercivity()
    zeta = problem.lipschitz.constant if problem.lipschitz is not None else 0.0
    ell = coupling_sq_bound(problem)
    budget = 1.0 - epsilon if beta is not None else 1.0
    caps = []
    if beta is not None:
        caps.append(2.0 * beta * epsilon)
    if zeta > 0.0:
        caps.append(math.sqrt(0.5 * budget) / zeta)
    tau = safety * min(caps) if caps else safety / max(math.sqrt(ell), 1.0)
    sigma = safety * (budget - (tau * zeta) ** 2) / (tau * max(ell, 1e-12))
    return StepSizes(tau, sigma, epsilon if beta is not None else None)


# ---------------------------------------------------------------------------
# problem-description files

_CALL_RE = re.compile(r"^\s*([a-z_][a-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def _parse_call(text):
    """Parse ``name(arg, key=value, ...)`` into (name, args, kwargs)."""
    match = _CALL_RE.match(text)
    if match is None:
        raise ValueError(f"cannot parse operator preset {text!r}")
    name = match.group(1)
    args, kwargs = [], {}
    body = match.group(2)
    if body:
        for piece in body.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" in piece:
                key, _, val = piece.partition("=")
                kwargs[key.strip()] = ast.literal_eval(val.strip())
            else:
                args.append(ast.literal_eval(piece))
    return name, args, kwargs


def _resolvent_preset(text, dim):
    name, args, kwargs = _parse_call(text)
    if name == "none":
        return None
    if name == "box":
        lo, hi = (args + [-1.0, 1.0])[:2] if args else (
            kwargs.get("lo", -1.0), kwargs.get("hi", 1.0))
        return box_resolvent(dim, lo, hi)
    if name == "l1":
        weight = args[0] if args else kwargs.get("weight", 1.0)
        return l1_resolvent(dim, weight)
    if name == "quadratic":
        scale = args[0] if args else kwargs.get("scale", 1.0)
        return ResolventOp(dim, lambda t, v: v / (1.0 + t * scale))
    raise ValueError(f"unknown resolvent preset {name!r}")


def _cocoercive_preset(text, dim):
    name, args, kwargs = _parse_call(text)
    if name == "none":
        return None
    if name == "quadratic":
        seed = kwargs.get("seed", 0)
        scale = kwargs.get("scale", 1.0)
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((dim, dim))
        g_mat = scale * (np.eye(dim) + v @ v.T / dim)
        return affine_cocoercive(g_mat, -g_mat @ rng.standard_normal(dim))
    raise ValueError(f"unknown cocoercive preset {name!r}")


def _coupling_preset(text, in_dim, out_dim):
    name, args, kwargs = _parse_call(text)
    if name == "identity":
        if in_dim != out_dim:
            raise ValueError("identity coupling needs equal block dims")
        return matrix_map(np.eye(in_dim))
    if name == "gaussian":
        seed = kwargs.get("seed", 0)
        scale = kwargs.get("scale", 1.0)
        rng = np.random.default_rng(seed)
        return matrix_map(scale * rng.standard_normal((out_dim, in_dim)) / math.sqrt(in_dim))
    raise ValueError(f"unknown coupling preset {name!r}")


def _lipschitz_preset(text, dim):
    name, args, kwargs = _parse_call(text)
    if name == "none":
        return None
    if name == "skew":
        seed = kwargs.get("seed", 0)
        scale = kwargs.get("scale", 1.0)
        rng = np.random.default_rng(seed)
        r = rng.standard_normal((dim, dim))
        s_mat = scale * (r - r.T) / 2.0
        return ForwardOp(dim, "lipschitz", float(np.linalg.norm(s_mat, 2)),
                         lambda x: s_mat @ x)
    if name == "mean":
        c = args[0] if args else kwargs.get("scale", 1.0)
        ones = np.full((dim, dim), 1.0 / dim)
        return ForwardOp(dim, "lipschitz", c, lambda x: c * (ones @ x))
    raise ValueError(f"unknown lipschitz preset {name!r}")


def load_block_problem(path):
    """Build a BlockProblem from a key=value description file.

    The file has a ``[problem]`` section with ``primal_blocks`` and
    ``dual_blocks`` counts, one ``[primal I]`` section per primal block
    (keys ``dim``, ``resolvent``, ``cocoercive``), one ``[dual K]``
    section per dual block (keys ``dim``, ``resolvent``), a
    ``[coupling I K]`` section per nonzero coupling (key ``map``), and
    an optional ``[lipschitz]`` section (key ``kind``) acting on the
    whole primal product.  Operator values use the named presets
    ``none``, ``box(lo, hi)``, ``l1(weight)``, ``quadratic(...)``,
    ``identity``, ``gaussian(seed=.., scale=..)``, ``skew(...)``, and
    ``mean(c)``.
    """
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"block description not found: {path}")
    n_primal = parser.getint("problem", "primal_blocks")
    n_dual = parser.getint("problem", "dual_blocks")

    primal_dims, resolvents, cocoercives = [], [], []
    for i in range(n_primal):
        section = parser[f"primal {i}"]
        dim = int(section["dim"])
        primal_dims.append(dim)
        resolvents.append(_resolvent_preset(section.get("resolvent", "none"), dim))
        cocoercives.append(_cocoercive_preset(section.get("cocoercive", "none"), dim))

    dual_dims, dual_resolvents = [], []
    for k in range(n_dual):
        section = parser[f"dual {k}"]
        dim = int(section["dim"])
        dual_dims.append(dim)
        dual_resolvents.append(_resolvent_preset(section.get("resolvent", "none"), dim))

    couplings = {}
    for name in parser.sections():
        parts = name.split()
        if parts[0] != "coupling":
            continue
        if len(parts) != 3:
            raise ValueError(f"coupling section {name!r} needs two indices")
        i, k = int(parts[1]), int(parts[2])
        couplings[(i, k)] = _coupling_preset(parser[name]["map"],
                                             primal_dims[i], dual_dims[k])

    lipschitz = None
    if parser.has_section("lipschitz"):
        lipschitz = _lipschitz_preset(parser["lipschitz"].get("kind", "none"),
                                      sum(primal_dims))

    return BlockProblem(primal_dims=primal_dims, dual_dims=dual_dims,
                        resolvents=resolvents, dual_resolvents=dual_resolvents,
                        couplings=couplings, cocoercives=cocoercives,
                        lipschitz=lipschitz)
