"""Desk-scale image deblurring benchmark.

The pipeline restores an image from a blurred, noisy observation by
minimizing, over the intensity box, the sum of a quadratic data-fit
term, a total-variation penalty on the discrete gradient, and a Huber
penalty on orthonormal Haar coefficients:

    minimize over x in [0, x_max]^N
        0.5 * |blur(x) - obs|^2
        + lambda1 * |grad(x)|_1
        + lambda2 * huber_delta(haar(x))

Mapped onto the splitting: the box projection is the primal resolvent,
the weighted l1 term on the gradient is the dual term with the discrete
gradient as coupling (certified bound sqrt(8)), the Huber-on-wavelet
gradient is the Lipschitz term with constant lambda2/delta (the Haar
isometry preserves the Huber constant), and the data-fit gradient is
the cocoercive term with constant 1 (periodic blur has norm exactly 1).

All artifacts (observation, restoration, metrics, manifest) are
deterministic functions of the configuration, seed included.
"""

from __future__ import annotations

import ast
import configparser
import math
from dataclasses import dataclass, asdict, replace
from pathlib import Path

import numpy as np

from ._version import __version__
from .imaging import (ImageGrid, blur_map, discrete_gradient, gradient_map,
                      haar_map, read_pgm, write_pgm)
from .prox import ForwardOp, box_resolvent, huber_gradient, huber_value, l1_resolvent
from .solver import (StepSizes, ProblemSpec, check_step_conditions, run,
                     validate_steps)

__all__ = [
    "DeblurConfig",
    "build_deblur_problem",
    "default_step_recipe",
    "load_manifest",
    "make_observation",
    "make_phantom",
    "run_experiment",
]


@dataclass
class DeblurConfig:
    """Benchmark configuration; defaults follow the reference recipe at
    desk scale (64x64 grid instead of full-size images)."""

    rows: int = 64
    cols: int = 64
    lambda1: float = 1e-2       # total-variation weight
    lambda2: float = 1e-4       # wavelet-Huber weight
    delta: float = 1e-3         # Huber threshold
    blur_size: int = 9
    blur_std: float = 4.0
    noise_std: float = 1e-3     # relative to x_max
    x_max: float = 1.0
    wavelet_levels: int = 3
    seed: int = 0
    max_iters: int = 5000
    rel_pd_tol: float = 0.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be positive")
        div = 1 << self.wavelet_levels
        if self.rows % div != 0 or self.cols % div != 0:
            raise ValueError(f"grid must be divisible by 2^{self.wavelet_levels}")
        for name in ("lambda1", "lambda2", "delta", "blur_std", "x_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.blur_size % 2 != 1:
            raise ValueError("blur_size must be odd")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


def make_phantom(rows, cols, seed=0, x_max=1.0):
    """Seeded piecewise-smooth test image: a gentle ramp plus a few
    constant rectangles and disks, clipped to [0, x_max]."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:rows, 0:cols].astype(float)
    a = 0.15 + 0.25 * xx / max(cols - 1, 1) + 0.10 * yy / max(rows - 1, 1)
    for _ in range(3):
        r0 = rng.integers(0, rows)
        c0 = rng.integers(0, cols)
        h = rng.integers(rows // 8 + 1, rows // 3 + 2)
        w = rng.integers(cols // 8 + 1, cols // 3 + 2)
        a[r0:min(r0 + h, rows), c0:min(c0 + w, cols)] = rng.uniform(0.1, 0.95)
    for _ in range(2):
        cy, cx = rng.uniform(0, rows), rng.uniform(0, cols)
        rad = rng.uniform(min(rows, cols) / 10, min(rows, cols) / 4)
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= rad ** 2
        a[mask] = rng.uniform(0.1, 0.95)
    return ImageGrid(rows, cols, np.clip(a, 0.0, 1.0).ravel() * x_max)


def make_observation(clean, cfg):
    """Blur the clean image and add seeded Gaussian noise.

    Noise standard deviation is ``noise_std * x_max`` in intensity
    units; the observation is not clipped (the model is linear).
    """
    if clean.rows % (1 << cfg.wavelet_levels) or clean.cols % (1 << cfg.wavelet_levels):
        raise ValueError("image dimensions must be divisible by the wavelet stride")
    blur = blur_map(clean.rows, clean.cols, cfg.blur_size, cfg.blur_std)
    z = blur(clean.pixels)
    if cfg.noise_std > 0:
        rng = np.random.default_rng(cfg.seed)
        z = z + cfg.noise_std * cfg.x_max * rng.standard_normal(z.shape)
    return ImageGrid(clean.rows, clean.cols, z)


def build_deblur_problem(obs, cfg):
    """Assemble the splitting data and the objective callback.

    Returns ``(spec, objective)`` where ``objective(x)`` evaluates the
    data-fit plus both penalties at a flat pixel vector.
    """
    rows, cols = obs.rows, obs.cols
    n = rows * cols
    blur = blur_map(rows, cols, cfg.blur_size, cfg.blur_std)
    grad = gradient_map(rows, cols)
    wavelet = haar_map(rows, cols, cfg.wavelet_levels)
    z = obs.pixels

    def huber_wavelet_grad(x):
        return cfg.lambda2 * wavelet.adjoint(huber_gradient(wavelet(x), cfg.delta))

    def data_grad(x):
        return blur.adjoint(blur(x) - z)

    spec = ProblemSpec(
        primal_dim=n,
        dual_dim=2 * n,
        resolvent=box_resolvent(n, 0.0, cfg.x_max),
        dual_resolvent=l1_resolvent(2 * n, cfg.lambda1),
        coupling=grad,
        lipschitz=ForwardOp(n, "lipschitz", cfg.lambda2 / cfg.delta, huber_wavelet_grad),
        cocoercive=ForwardOp(n, "cocoercive", 1.0 / blur.norm_bound ** 2, data_grad),
    )

    def objective(x):
        res = blur(x) - z
        tv = float(np.abs(discrete_gradient(ImageGrid(rows, cols, x))).sum())
        return (0.5 * float(res @ res)
                + cfg.lambda1 * tv
                + cfg.lambda2 * huber_value(wavelet(x), cfg.delta))

    return spec, objective


def default_step_recipe(beta, zeta, coupling_norm, quadratic_term="lipschitz"):
    """The benchmark's step-size recipe.

    Sets ``epsilon = 0.8 / (1 + sqrt(1 + 16 beta^2))``, ``tau = 2 epsilon``
    (capped at ``2 beta epsilon`` so the cocoercive condition always
    holds), then ``sigma = 0.99 (1 - epsilon - quad) / (tau |coupling|^2)``
    where ``quad`` is ``tau^2 zeta^2`` by default.  Passing
    ``quadratic_term="cocoercive"`` uses ``tau^2 beta^2`` instead, an
    alternative sizing that is more conservative whenever ``beta > zeta``.
    If the result still fails validation, sigma is shrunk by the minimal
    factor that passes; every adjustment is reported in the notes.

    Returns ``(StepSizes, notes)``.
    """
    if beta <= 0 or zeta < 0 or coupling_norm <= 0:
        raise ValueError("beta and coupling_norm must be positive, zeta nonnegative")
    if quadratic_term not in ("lipschitz", "cocoercive"):
        raise ValueError("quadratic_term must be 'lipschitz' or 'cocoercive'")
    notes = []
    eps = 0.8 / (1.0 + math.sqrt(1.0 + 16.0 * beta * beta))
    tau = 2.0 * eps
    if tau > 2.0 * beta * eps:
        tau = 2.0 * beta * eps
        notes.append(f"tau capped at 2*beta*epsilon = {tau!r}")
    quad = (tau * zeta) ** 2 if quadratic_term == "lipschitz" else (tau * beta) ** 2
    headroom = 1.0 - eps - quad
    if headroom <= 0:
        raise ValueError("no admissible sigma: 1 - epsilon - quadratic term <= 0")
    sigma = 0.99 * headroom / (tau * coupling_norm ** 2)
    steps = StepSizes(tau=tau, sigma=sigma, epsilon=eps)

    verdict = _recipe_verdict(steps, beta, zeta, coupling_norm)
    if not verdict.valid:
        # only the coupling condition can still fail; shrink sigma minimally
        target = (1.0 - eps) - (tau * zeta) ** 2
        sigma_max = target / (tau * coupling_norm ** 2)
        shrink = 0.999999 * sigma_max / sigma
        steps = StepSizes(tau=tau, sigma=sigma * shrink, epsilon=eps)
        notes.append(f"sigma shrunk by factor {shrink!r} to satisfy the coupling bound")
        if not _recipe_verdict(steps, beta, zeta, coupling_norm).valid:
            raise ValueError("step recipe could not be repaired")
    return steps, notes


def _recipe_verdict(steps, beta, zeta, coupling_norm):
    return check_step_conditions(steps.tau, steps.sigma, beta=beta, zeta=zeta,
                                 coupling_norm=coupling_norm, epsilon=steps.epsilon)


def _metrics_lines(report):
    yield "iter,dx,du,rel_pd_err,objective\n"
    for i in range(report.n_iters):
        yield (f"{i + 1},{float(report.dx[i])!r},{float(report.du[i])!r},"
               f"{float(report.rel_pd_err[i])!r},{float(report.objective[i])!r}\n")


def _manifest_value(v):
    return repr(v) if isinstance(v, (int, float)) else str(v)


def _write_manifest(path, cfg, derived):
    parser = configparser.ConfigParser()
    parser["config"] = {k: _manifest_value(v) for k, v in asdict(cfg).items()}
    parser["derived"] = {k: _manifest_value(v) for k, v in derived.items()}
    with open(path, "w") as fh:
        parser.write(fh)


def load_manifest(path):
    """Rebuild the DeblurConfig recorded in a run manifest."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    raw = dict(parser["config"])
    kwargs = {fld: ast.literal_eval(raw[fld])
              for fld in DeblurConfig.__dataclass_fields__}
    return DeblurConfig(**kwargs)


def run_experiment(clean, cfg, out_dir):
    """Run the full benchmark and write its artifacts.

    ``clean`` is an ImageGrid or a path to a binary PGM (loaded at the
    configured ``x_max`` scale).  Writes into ``out_dir``:
    ``observation.pgm``, ``restored.pgm``, ``metrics.csv`` (one row per
    iteration), and ``manifest.cfg`` with the full configuration and all
    derived constants.  Returns the solver RunReport.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(clean, (str, Path)):
        clean = read_pgm(clean, x_max=cfg.x_max)
    if clean.rows != cfg.rows or clean.cols != cfg.cols:
        cfg = replace(cfg, rows=clean.rows, cols=clean.cols)

    obs = make_observation(clean, cfg)
    spec, objective = build_deblur_problem(obs, cfg)
    steps, notes = default_step_recipe(
        beta=spec.cocoercive.constant,
        zeta=spec.lipschitz.constant,
        coupling_norm=spec.coupling.norm_bound,
    )
    verdict = validate_steps(spec, steps)
    if not verdict.valid:
        raise RuntimeError("recipe produced invalid steps: " + verdict.describe())

    report = run(spec, steps, max_iters=cfg.max_iters, rel_pd_tol=cfg.rel_pd_tol,
                 objective=objective)

    write_pgm(out_dir / "observation.pgm", obs, x_max=cfg.x_max, bits=16)
    write_pgm(out_dir / "restored.pgm", ImageGrid(cfg.rows, cfg.cols, report.x),
              x_max=cfg.x_max, bits=16)
    with open(out_dir / "metrics.csv", "w") as fh:
        fh.writelines(_metrics_lines(report))

    err = report.x - clean.pixels
    mse = float(err @ err) / err.shape[0]
    derived = {
        "version": __version__,
        "beta": spec.cocoercive.constant,
        "zeta": spec.lipschitz.constant,
        "coupling_norm": spec.coupling.norm_bound,
        "tau": steps.tau,
        "sigma": steps.sigma,
        "epsilon": steps.epsilon,
        "recipe_notes": "; ".join(notes) if notes else "none",
        "termination": report.termination,
        "n_iters": report.n_iters,
        "psnr_vs_clean": (10.0 * math.log10(cfg.x_max ** 2 / mse)
                          if mse > 0 else math.inf),
    }
    _write_manifest(out_dir / "manifest.cfg", cfg, derived)
    return report
