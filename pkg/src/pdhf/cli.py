"""Command-line shell: step validation, preset runs, the deblurring
benchmark, parameter sweeps, and a quick self-test.

Exit codes: 0 success/valid verdict, 1 domain verdict failure,
2 usage or I/O error.  Every run writes a manifest with the full
configuration, seed, and version stamp so it can be reproduced
byte-identically.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from ._version import __version__
from .deblur import DeblurConfig, make_phantom, run_experiment
from .presets import PRESET_NAMES, run_preset
from .solver import check_step_conditions

USAGE_ERROR = 2


def _parse_overrides(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _load_deblur_config(path, overrides):
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise FileNotFoundError(f"config file not found: {path}")
        if parser.has_section("deblur"):
            values.update(dict(parser["deblur"]))
        elif parser.has_section("config"):
            values.update(dict(parser["config"]))
    values.update(overrides)
    fields = DeblurConfig.__dataclass_fields__
    unknown = set(values) - set(fields)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {k: ast.literal_eval(v) if isinstance(v, str) else v
              for k, v in values.items()}
    return DeblurConfig(**kwargs)


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate_steps(args):
    beta = args.beta if args.beta and args.beta > 0 else None
    zeta = args.zeta if args.zeta and args.zeta > 0 else 0.0
    try:
        verdict = check_step_conditions(
            args.tau, args.sigma, rho=args.rho, beta=beta, zeta=zeta,
            coupling_norm=args.l_norm, epsilon=args.eps)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(verdict.describe())
    if beta is not None and zeta == 0.0 and args.eps is not None \
            and args.eps == args.tau / (2.0 * beta):
        lhs = args.sigma * args.tau * args.l_norm ** 2
        rhs = 1.0 - args.tau / (2.0 * beta)
        print(f"reduced form (no Lipschitz term, epsilon = tau/(2*beta)): "
              f"sigma*tau*|coupling|^2 = {lhs:.6g} < 1 - tau/(2*beta) = {rhs:.6g}")
    return 0 if verdict.valid else 1


def _write_solve_manifest(out_dir, source, report, extra):
    manifest = configparser.ConfigParser()
    manifest["run"] = {**source, "version": __version__}
    manifest["result"] = {
        "termination": report.termination,
        "n_iters": repr(report.n_iters),
        **extra,
    }
    with open(out_dir / "manifest.cfg", "w") as fh:
        manifest.write(fh)


def _solve_blocks(args, out_dir):
    from .blocks import default_block_steps, load_block_problem, run_multivariate
    try:
        problem = load_block_problem(args.blocks)
    except (OSError, ValueError, KeyError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    steps = default_block_steps(problem)
    report = run_multivariate(
        problem, steps,
        max_iters=args.max_iters if args.max_iters is not None else 2000,
        rel_pd_tol=args.tol if args.tol is not None else 0.0,
        metrics_path=out_dir / "metrics.csv")
    _write_solve_manifest(out_dir, {"blocks_file": str(args.blocks),
                                    "seed": repr(args.seed)},
                          report,
                          {"final_rel_pd_err": repr(float(report.rel_pd_err[-1]))})
    print(f"block system: {problem.n_primal} primal / {problem.n_dual} dual blocks")
    print(f"iterations: {report.n_iters} ({report.termination})")
    print(f"final rel_pd_err: {float(report.rel_pd_err[-1]):.3e}")
    return 0


def cmd_solve(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.blocks is not None:
        return _solve_blocks(args, out_dir)
    kwargs = {"seed": args.seed, "metrics_path": out_dir / "metrics.csv"}
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    if args.tol is not None:
        kwargs["rel_pd_tol"] = args.tol
    result = run_preset(args.preset, **kwargs)

    _write_solve_manifest(
        out_dir,
        {"preset": args.preset, "seed": repr(args.seed),
         "max_iters": repr(kwargs.get("max_iters", "default")),
         "tol": repr(kwargs.get("rel_pd_tol", "default"))},
        result.report,
        {"oracle_error": repr(result.oracle_error)})

    print(f"preset {args.preset}: {result.description}")
    print(f"iterations: {result.report.n_iters} ({result.report.termination})")
    print(f"oracle error: {result.oracle_error:.3e}")
    return 0


def _run_single_deblur(cfg, image_path, out_dir):
    if image_path is not None:
        clean = Path(image_path)
        if not clean.exists():
            raise FileNotFoundError(f"image not found: {clean}")
    else:
        clean = make_phantom(cfg.rows, cfg.cols, seed=cfg.seed, x_max=cfg.x_max)
    return run_experiment(clean, cfg, out_dir)


def cmd_deblur(args):
    try:
        cfg = _load_deblur_config(args.config, _parse_overrides(args.set))
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.max_iters is not None:
            cfg = replace(cfg, max_iters=args.max_iters)
        if args.tol is not None:
            cfg = replace(cfg, rel_pd_tol=args.tol)
        report = _run_single_deblur(cfg, args.image, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(f"wrote artifacts to {args.out}")
    print(f"iterations: {report.n_iters} ({report.termination})")
    print(f"final objective: {float(report.objective[-1]):.9g}")
    print(f"final rel_pd_err: {float(report.rel_pd_err[-1]):.3e}")
    return 0


def cmd_sweep(args):
    try:
        base = _load_deblur_config(args.config, _parse_overrides(args.set))
        key, _, values = args.param.partition("=")
        key = key.strip()
        if key not in DeblurConfig.__dataclass_fields__:
            raise ValueError(f"unknown sweep parameter {key!r}")
        parsed = [ast.literal_eval(v.strip()) for v in values.split(",") if v.strip()]
        if not parsed:
            raise ValueError("sweep needs at least one value")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    out_root = Path(args.out)

    def one(value):
        cfg = replace(base, **{key: value})
        sub = out_root / f"{key}={value}"
        report = _run_single_deblur(cfg, args.image, sub)
        return value, float(report.objective[-1]), float(report.rel_pd_err[-1])

    with ThreadPoolExecutor(max_workers=max(1, args.parallel)) as pool:
        results = list(pool.map(one, parsed))
    for value, obj, rel in results:
        print(f"{key}={value}: objective={obj:.9g} rel_pd_err={rel:.3e}")
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest  # local import keeps startup light
    checks = run_selftest()
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in checks) else 1


# ---------------------------------------------------------------------------
# parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="pdhf",
        description="four-operator primal-dual splitting toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate-steps", help="check step sizes against the convergence conditions")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--beta", type=float, default=None,
                   help="cocoercivity constant; omit when the term is absent")
    p.add_argument("--zeta", type=float, default=None,
                   help="Lipschitz constant; omit when the term is absent")
    p.add_argument("--l-norm", type=float, default=0.0,
                   help="certified norm bound of the coupling")
    p.add_argument("--rho", type=float, default=0.0)
    p.set_defaults(func=cmd_validate_steps)

    p = sub.add_parser("solve", help="run a named preset or a block description file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESET_NAMES))
    group.add_argument("--blocks", help="block-system description file")
    p.add_argument("--out", default="pdhf-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("deblur", help="run the deblurring benchmark")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--image", default=None, help="input PGM; default is a seeded phantom")
    p.add_argument("--out", default="pdhf-out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--set", action="append", metavar="K=V",
                   help="override a config key (repeatable)")
    p.set_defaults(func=cmd_deblur)

    p = sub.add_parser("sweep", help="run the benchmark over a parameter range")
    p.add_argument("--config", default=None)
    p.add_argument("--image", default=None)
    p.add_argument("--param", required=True, metavar="K=V1,V2,...",
                   help="config key and comma-separated values to sweep")
    p.add_argument("--out", default="pdhf-sweep")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--set", action="append", metavar="K=V")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="run quick built-in consistency checks")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
