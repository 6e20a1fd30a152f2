"""Four-operator primal-dual splitting with a half-forward correction.

The solver targets inclusions that pair a set-valued primal term, a
set-valued term composed with a linear coupling, a Lipschitz-only
forward term, and a cocoercive forward term.  Each iteration performs
one resolvent call per set-valued term, one evaluation of the
cocoercive term, two of the Lipschitz term, and one activation each of
the coupling and its adjoint:

    p = lip(x)
    z = resolvent(tau, x - tau * (coupling*(u) + p + coco(x)))
    q = tau * (lip(z) - p)
    u = dual_resolvent_of_inverse(sigma, u + sigma * coupling(2z - x - q))
    x = z - q

Dropping the Lipschitz term recovers the Condat-Vu recursion, dropping
the coupling and its set-valued term recovers forward-backward-half-
forward (FBHF), and dropping the cocoercive term gives a primal-dual
variant of Tseng's forward-backward-forward method with a relaxed step
rule.  Each reduction is implemented as its own literal recursion so
equivalence can be checked rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linops import LinearMap, as_vector
from .prox import ForwardOp, ResolventOp, resolvent_of_inverse

__all__ = [
    "ConditionReport",
    "IterState",
    "OracleSolution",
    "ProblemSpec",
    "RunReport",
    "StepSizes",
    "StepVerdict",
    "check_step_conditions",
    "condat_vu_epsilon",
    "condat_vu_step",
    "fbhf_epsilon",
    "fbhf_step",
    "fbhf_step_bound",
    "fixed_point_residual",
    "lyapunov_gamma",
    "pdfbf_step",
    "pdhf_step",
    "run",
    "select_step",
    "validate_steps",
]

TERMINATION_MAX_ITERS = "max_iters"
TERMINATION_TOLERANCE = "tolerance_met"
TERMINATION_DIVERGENCE = "divergence_detected"

_TINY = float(np.finfo(float).tiny)


# ---------------------------------------------------------------------------
# problem and step-size containers

@dataclass
class ProblemSpec:
    """The five-operator data of one inclusion problem.

    Absent terms are encoded by ``None`` markers, never by numerically
    zero operators; the solver dispatches on the markers.

    Fields
    ------
    resolvent : set-valued primal term (monotone with modulus ``rho``),
        ``None`` meaning the zero operator (identity resolvent).
    dual_resolvent : set-valued term composed with the coupling, given
        through the resolvent of the operator itself; its inverse is
        resolved internally through the Moreau identity.  ``None`` means
        the zero operator, whose inverse has the whole space as its
        value at the origin, so the dual iterate collapses to zero.
    coupling : linear operator from the primal to the dual space.
    lipschitz : single-valued monotone term that is only Lipschitz.
    cocoercive : single-valued cocoercive term.
    """

    primal_dim: int
    dual_dim: int = 0
    resolvent: ResolventOp | None = None
    dual_resolvent: ResolventOp | None = None
    coupling: LinearMap | None = None
    lipschitz: ForwardOp | None = None
    cocoercive: ForwardOp | None = None

    def __post_init__(self):
        if self.primal_dim < 1:
            raise ValueError("primal_dim must be positive")
        if self.dual_dim < 0:
            raise ValueError("dual_dim must be nonnegative")
        if self.resolvent is not None and self.resolvent.dim != self.primal_dim:
            raise ValueError("resolvent dimension mismatch")
        if self.dual_resolvent is not None:
            if self.dual_resolvent.dim != self.dual_dim:
                raise ValueError("dual resolvent dimension mismatch")
            if self.dual_resolvent.rho != 0.0:
                raise ValueError("dual resolvent must be plain monotone (rho == 0)")
        if self.coupling is not None:
            if self.coupling.in_dim != self.primal_dim or self.coupling.out_dim != self.dual_dim:
                raise ValueError("coupling dimensions mismatch")
        for name, op, kind in (("lipschitz", self.lipschitz, "lipschitz"),
                               ("cocoercive", self.cocoercive, "cocoercive")):
            if op is not None:
                if op.dim != self.primal_dim:
                    raise ValueError(f"{name} term dimension mismatch")
                if op.kind != kind:
                    raise ValueError(f"{name} term must have kind {kind!r}")

    @property
    def rho(self):
        return 0.0 if self.resolvent is None else self.resolvent.rho

    @property
    def zeta(self):
        """Lipschitz constant of the half-forward term; 0 when absent."""
        return 0.0 if self.lipschitz is None else self.lipschitz.constant

    @property
    def beta(self):
        """Cocoercivity constant, or None when the term is absent."""
        return None if self.cocoercive is None else self.cocoercive.constant

    @property
    def coupling_norm(self):
        return 0.0 if self.coupling is None else self.coupling.norm_bound


@dataclass
class StepSizes:
    """Primal step ``tau``, dual step ``sigma``, and the split parameter
    ``epsilon`` in ]0,1[ balancing the cocoercive term against the rest."""

    tau: float
    sigma: float = 1.0
    epsilon: float | None = None


@dataclass
class IterState:
    """One primal-dual iterate plus the scratch points of the recursion."""

    x: np.ndarray
    u: np.ndarray
    p: np.ndarray
    z: np.ndarray
    q: np.ndarray
    n: int = 0

    @classmethod
    def initial(cls, x0, u0):
        x0 = np.array(x0, dtype=float)
        u0 = np.array(u0, dtype=float)
        zeros = np.zeros_like(x0)
        return cls(x0, u0, zeros.copy(), x0.copy(), zeros.copy(), 0)


@dataclass
class OracleSolution:
    """A known solution pair, used only by diagnostics and tests."""

    x: np.ndarray
    u: np.ndarray


# ---------------------------------------------------------------------------
# step-size theory

@dataclass
class ConditionReport:
    name: str
    expression: str
    satisfied: bool
    margin: float


@dataclass
class StepVerdict:
    valid: bool
    conditions: list

    @property
    def failed(self):
        return [c.name for c in self.conditions if not c.satisfied]

    def describe(self):
        lines = []
        for c in self.conditions:
            tag = "ok " if c.satisfied else "VIOLATED"
            lines.append(f"{tag} {c.name}: {c.expression} (margin {c.margin:.6g})")
        return "\n".join(lines)


def check_step_conditions(tau, sigma, *, rho=0.0, beta=None, zeta=0.0,
                          coupling_norm=0.0, epsilon=None):
    """Check the convergence conditions on (tau, sigma, epsilon).

    Three named conditions are evaluated:

    * ``resolvent``: ``tau * rho > -1`` so the primal resolvent stays
      single valued;
    * ``cocoercive`` (only when a cocoercive term is present, i.e.
      ``beta`` is not None): ``tau <= 2 * beta * epsilon``;
    * ``coupling``: ``tau*sigma*coupling_norm**2 + tau**2 * zeta**2``
      strictly below ``1 - epsilon``, or strictly below 1 when no
      cocoercive term is present (the epsilon split is then unnecessary).
    """
    if tau <= 0 or sigma <= 0:
        raise ValueError("tau and sigma must be positive")
    if beta is not None:
        if epsilon is None or not (0.0 < epsilon < 1.0):
            raise ValueError("epsilon in ]0,1[ is required when a cocoercive term is present")

    conditions = []

    lhs = tau * rho
    conditions.append(ConditionReport(
        "resolvent", f"tau*rho = {lhs:.6g} > -1", lhs > -1.0, lhs + 1.0))

    if beta is not None:
        bound = 2.0 * beta * epsilon
        conditions.append(ConditionReport(
            "cocoercive", f"tau = {tau:.6g} <= 2*beta*epsilon = {bound:.6g}",
            tau <= bound, bound - tau))

    lhs = tau * sigma * coupling_norm ** 2 + tau ** 2 * zeta ** 2
    bound = 1.0 - epsilon if beta is not None else 1.0
    conditions.append(ConditionReport(
        "coupling",
        f"tau*sigma*|coupling|^2 + tau^2*zeta^2 = {lhs:.6g} < {bound:.6g}",
        lhs < bound, bound - lhs))

    return StepVerdict(all(c.satisfied for c in conditions), conditions)


def validate_steps(spec, steps):
    """Validate step sizes against the conditions for ``spec``.

    Uses the certified norm bound of the coupling; drops the Lipschitz
    term when absent and switches to the relaxed rule (bound 1, no
    epsilon) when the cocoercive term is absent.
    """
    return check_step_conditions(
        steps.tau, steps.sigma,
        rho=spec.rho, beta=spec.beta, zeta=spec.zeta,
        coupling_norm=spec.coupling_norm, epsilon=steps.epsilon)


def condat_vu_epsilon(tau, beta):
    """The epsilon choice that reduces the step rule, with no Lipschitz
    term, to the classical Condat-Vu requirement."""
    if tau <= 0 or beta <= 0:
        raise ValueError("tau and beta must be positive")
    return tau / (2.0 * beta)


def fbhf_epsilon(beta, zeta, tol=1e-14):
    """The epsilon solving ``2*beta*zeta*epsilon = sqrt(1 - epsilon)``.

    Solved by bisection on ]0,1[ to absolute tolerance ``tol``; this is
    the choice under which the step rule without coupling reproduces the
    FBHF step-size interval.
    """
    if beta <= 0 or zeta <= 0:
        raise ValueError("beta and zeta must be positive")

    def g(eps):
        return 2.0 * beta * zeta * eps - math.sqrt(1.0 - eps)

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fbhf_step_bound(beta, zeta):
    """Supremum of admissible primal steps when only the forward terms act:
    ``4*beta / (1 + sqrt(1 + 16*beta^2*zeta^2))``."""
    if beta <= 0 or zeta < 0:
        raise ValueError("beta must be positive and zeta nonnegative")
    return 4.0 * beta / (1.0 + math.sqrt(1.0 + 16.0 * beta ** 2 * zeta ** 2))


# ---------------------------------------------------------------------------
# one-iteration recursions

def _dual_zeros(spec):
    return np.zeros(spec.dual_dim)


def _primal_resolve(spec, tau, v):
    return v if spec.resolvent is None else spec.resolvent(tau, v)


def _dual_update(spec, sigma, u, primal_point):
    """Shared dual line: resolvent of sigma times the inverse dual term.

    ``primal_point`` is the already-combined primal argument fed through
    the coupling; ``None`` when the coupling is absent.
    """
    if spec.dual_resolvent is None:
        # zero dual term: the resolvent of its inverse is identically zero
        return _dual_zeros(spec)
    w = u if primal_point is None else u + sigma * spec.coupling(primal_point)
    return resolvent_of_inverse(spec.dual_resolvent, sigma, w)


def pdhf_step(spec, steps, state):
    """One iteration of the full four-operator recursion."""
    tau, sigma = steps.tau, steps.sigma
    x, u = state.x, state.u
    lip, coco, coupling = spec.lipschitz, spec.cocoercive, spec.coupling

    p = lip(x) if lip is not None else None
    g = np.zeros_like(x)
    if coupling is not None:
        g += coupling.adjoint(u)
    if p is not None:
        g += p
    if coco is not None:
        g += coco(x)
    z = _primal_resolve(spec, tau, x - tau * g)

    if p is not None:
        q = tau * (lip(z) - p)
        x_new = z - q
    else:
        q = np.zeros_like(x)
        x_new = z

    u_new = _dual_update(spec, sigma, u,
                         2.0 * z - x - q if coupling is not None else None)
    p_rec = p if p is not None else np.zeros_like(x)
    return IterState(x_new, u_new, p_rec, z, q, state.n + 1)


def condat_vu_step(spec, steps, state):
    """Reduction without the Lipschitz term: two resolvents, one forward
    step, one coupling activation each way."""
    if spec.lipschitz is not None:
        raise ValueError("condat_vu_step requires the Lipschitz term to be absent")
    tau, sigma = steps.tau, steps.sigma
    x, u = state.x, state.u

    g = np.zeros_like(x)
    if spec.coupling is not None:
        g += spec.coupling.adjoint(u)
    if spec.cocoercive is not None:
        g += spec.cocoercive(x)
    x_new = _primal_resolve(spec, tau, x - tau * g)
    u_new = _dual_update(spec, sigma, u,
                         2.0 * x_new - x if spec.coupling is not None else None)
    zeros = np.zeros_like(x)
    return IterState(x_new, u_new, zeros, x_new.copy(), zeros.copy(), state.n + 1)


def fbhf_step(spec, steps, state):
    """Reduction without coupling and dual term; the dual iterate stays 0."""
    if spec.dual_resolvent is not None or spec.coupling is not None:
        raise ValueError("fbhf_step requires coupling and dual term to be absent")
    tau = steps.tau
    x = state.x
    lip, coco = spec.lipschitz, spec.cocoercive

    p = lip(x) if lip is not None else None
    g = np.zeros_like(x)
    if p is not None:
        g += p
    if coco is not None:
        g += coco(x)
    z = _primal_resolve(spec, tau, x - tau * g)
    if p is not None:
        q = tau * (lip(z) - p)
        x_new = z - q
    else:
        q = np.zeros_like(x)
        x_new = z
    p_rec = p if p is not None else np.zeros_like(x)
    return IterState(x_new, _dual_zeros(spec), p_rec, z, q, state.n + 1)


def pdfbf_step(spec, steps, state):
    """Variant without the cocoercive term (primal-dual forward-backward-
    forward); validated by the relaxed rule with bound 1."""
    if spec.cocoercive is not None:
        raise ValueError("pdfbf_step requires the cocoercive term to be absent")
    tau, sigma = steps.tau, steps.sigma
    x, u = state.x, state.u
    lip, coupling = spec.lipschitz, spec.coupling

    p = lip(x) if lip is not None else None
    g = np.zeros_like(x)
    if coupling is not None:
        g += coupling.adjoint(u)
    if p is not None:
        g += p
    z = _primal_resolve(spec, tau, x - tau * g)
    if p is not None:
        q = tau * (lip(z) - p)
        x_new = z - q
    else:
        q = np.zeros_like(x)
        x_new = z
    u_new = _dual_update(spec, sigma, u,
                         2.0 * z - x - q if coupling is not None else None)
    p_rec = p if p is not None else np.zeros_like(x)
    return IterState(x_new, u_new, p_rec, z, q, state.n + 1)


def select_step(spec):
    """Pick the dedicated recursion matching the absent-term markers."""
    if spec.lipschitz is None:
        return condat_vu_step
    if spec.dual_resolvent is None and spec.coupling is None:
        return fbhf_step
    if spec.cocoercive is None:
        return pdfbf_step
    return pdhf_step


# ---------------------------------------------------------------------------
# diagnostics

def lyapunov_gamma(steps, x, u, oracle, coupling=None):
    """Energy of an iterate relative to a known solution.

    ``|x - x*|^2 + (tau/sigma) |u - u*|^2 - 2 tau <x - x*, coupling*(u - u*)>``;
    nonincreasing along validated runs and bounded below by
    ``(1 - sigma*tau*|coupling|^2) * max(|x - x*|^2, (tau/sigma)|u - u*|^2)``.
    """
    dx = np.asarray(x, dtype=float) - oracle.x
    du = np.asarray(u, dtype=float) - oracle.u
    val = float(dx @ dx) + (steps.tau / steps.sigma) * float(du @ du)
    if coupling is not None:
        val -= 2.0 * steps.tau * float(dx @ coupling.adjoint(du))
    return val


def fixed_point_residual(spec, steps, x, u):
    """Displacement norm of one iteration applied at ``(x, u)``."""
    state = IterState.initial(x, u)
    new = select_step(spec)(spec, steps, state)
    return math.sqrt(float(np.sum((new.x - state.x) ** 2))
                     + float(np.sum((new.u - state.u) ** 2)))


# ---------------------------------------------------------------------------
# driver

@dataclass
class RunReport:
    """Per-iteration metrics of one solver run.

    ``dx``/``du`` are increment norms, ``rel_pd_err`` the relative
    primal-dual error sqrt((dx^2 + du^2) / (|x|^2 + |u|^2)) with a tiny
    denominator guard.  ``gamma`` is recorded when an oracle solution is
    supplied, ``objective`` when a callback is supplied.
    """

    dx: np.ndarray
    du: np.ndarray
    rel_pd_err: np.ndarray
    gamma: np.ndarray | None
    objective: np.ndarray | None
    termination: str
    x: np.ndarray
    u: np.ndarray
    n_iters: int


def _fmt(v):
    return repr(float(v))


def run(spec, steps, x0=None, u0=None, *, max_iters=1000, rel_pd_tol=0.0,
        objective=None, oracle=None, metrics_path=None, check_steps=True):
    """Iterate the splitting until the relative primal-dual error drops
    to ``rel_pd_tol`` or ``max_iters`` is reached.

    Parameters
    ----------
    spec : ProblemSpec
    steps : StepSizes
        Validated against the convergence conditions unless
        ``check_steps=False`` explicitly overrides.
    x0, u0 : array or None
        Starting points; zero vectors by default.
    objective : callable or None
        Evaluated at every new primal iterate when supplied.
    oracle : OracleSolution or None
        Enables per-iteration recording of the Lyapunov energy.
    metrics_path : path or None
        Stream one CSV row per iteration with header
        ``iter,dx,du,rel_pd_err,gamma,objective``.

    Any non-finite iterate aborts the loop with termination
    ``divergence_detected`` and a report truncated to the completed
    iterations.
    """
    verdict = validate_steps(spec, steps)
    if check_steps and not verdict.valid:
        raise ValueError("step sizes rejected: " + ", ".join(verdict.failed)
                         + "\n" + verdict.describe())

    x = np.zeros(spec.primal_dim) if x0 is None else as_vector(x0, spec.primal_dim, "x0").copy()
    u = np.zeros(spec.dual_dim) if u0 is None else as_vector(u0, spec.dual_dim, "u0").copy()
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise ValueError("starting point contains non-finite entries")

    step_fn = select_step(spec)
    state = IterState.initial(x, u)

    dx_hist = np.empty(max_iters)
    du_hist = np.empty(max_iters)
    rel_hist = np.empty(max_iters)
    gamma_hist = np.empty(max_iters) if oracle is not None else None
    obj_hist = np.empty(max_iters) if objective is not None else None

    sink = open(metrics_path, "w") if metrics_path is not None else None
    if sink is not None:
        sink.write("iter,dx,du,rel_pd_err,gamma,objective\n")

    termination = TERMINATION_MAX_ITERS
    count = 0
    try:
        for n in range(max_iters):
            new = step_fn(spec, steps, state)
            if not (np.all(np.isfinite(new.x)) and np.all(np.isfinite(new.u))):
                termination = TERMINATION_DIVERGENCE
                break
            dxv = float(np.linalg.norm(new.x - state.x))
            duv = float(np.linalg.norm(new.u - state.u))
            den = float(state.x @ state.x) + float(state.u @ state.u)
            # square roots taken before dividing so the tiny-denominator
            # guard cannot overflow on a zero start
            rel = math.hypot(dxv, duv) / math.sqrt(max(den, _TINY))
            if not (math.isfinite(dxv) and math.isfinite(duv) and math.isfinite(rel)):
                termination = TERMINATION_DIVERGENCE
                break

            dx_hist[n] = dxv
            du_hist[n] = duv
            rel_hist[n] = rel
            gv = ov = None
            if gamma_hist is not None:
                gv = lyapunov_gamma(steps, new.x, new.u, oracle, spec.coupling)
                gamma_hist[n] = gv
            if obj_hist is not None:
                ov = objective(new.x)
                obj_hist[n] = ov
            if sink is not None:
                sink.write(f"{n + 1},{_fmt(dxv)},{_fmt(duv)},{_fmt(rel)},"
                           f"{_fmt(gv) if gv is not None else ''},"
                           f"{_fmt(ov) if ov is not None else ''}\n")
            count = n + 1
            state = new
            if rel <= rel_pd_tol:
                termination = TERMINATION_TOLERANCE
                break
    finally:
        if sink is not None:
            sink.close()

    return RunReport(
        dx=dx_hist[:count].copy(),
        du=du_hist[:count].copy(),
        rel_pd_err=rel_hist[:count].copy(),
        gamma=gamma_hist[:count].copy() if gamma_hist is not None else None,
        objective=obj_hist[:count].copy() if obj_hist is not None else None,
        termination=termination,
        x=state.x,
        u=state.u,
        n_iters=count,
    )
