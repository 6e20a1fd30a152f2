import math

import pytest

from pdhf.cli import main
from pdhf.deblur import default_step_recipe


def _recipe_flags():
    steps, _ = default_step_recipe(beta=1.0, zeta=0.1, coupling_norm=math.sqrt(8.0))
    return steps


# ---------------------------------------------------------------------------
# validate-steps

def test_validate_steps_benchmark_recipe_exits_zero(capsys):
    steps = _recipe_flags()
    code = main(["validate-steps", "--tau", str(steps.tau), "--sigma", str(steps.sigma),
                 "--eps", str(steps.epsilon), "--beta", "1.0", "--zeta", "0.1",
                 "--l-norm", str(math.sqrt(8.0))])
    assert code == 0
    out = capsys.readouterr().out
    assert "coupling" in out and "VIOLATED" not in out


def test_validate_steps_doubled_sigma_exits_one(capsys):
    steps = _recipe_flags()
    code = main(["validate-steps", "--tau", str(steps.tau),
                 "--sigma", str(2 * steps.sigma), "--eps", str(steps.epsilon),
                 "--beta", "1.0", "--zeta", "0.1", "--l-norm", str(math.sqrt(8.0))])
    assert code == 1
    out = capsys.readouterr().out
    assert "VIOLATED coupling" in out


def test_validate_steps_prints_reduced_form_without_lipschitz(capsys):
    tau, beta, l_norm = 0.5, 1.0, 1.0
    eps = tau / (2 * beta)
    sigma = 0.9 * (1 - eps) / (tau * l_norm ** 2)
    code = main(["validate-steps", "--tau", str(tau), "--sigma", str(sigma),
                 "--eps", str(eps), "--beta", str(beta), "--l-norm", str(l_norm)])
    assert code == 0
    assert "reduced form" in capsys.readouterr().out


def test_validate_steps_usage_error_on_nonpositive_tau(capsys):
    code = main(["validate-steps", "--tau", "-1.0", "--sigma", "1.0"])
    assert code == 2


def test_missing_required_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["validate-steps", "--sigma", "1.0"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# solve presets

def test_solve_toy_qp(tmp_path, capsys):
    code = main(["solve", "--preset", "toy-qp", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    err = float(out.split("oracle error:")[1].strip())
    assert err <= 1e-6
    assert (tmp_path / "metrics.csv").exists()
    assert (tmp_path / "manifest.cfg").exists()


def test_solve_bilinear_saddle(tmp_path, capsys):
    code = main(["solve", "--preset", "bilinear-saddle", "--out", str(tmp_path)])
    assert code == 0
    err = float(capsys.readouterr().out.split("oracle error:")[1].strip())
    assert err <= 1e-6


def test_solve_decoupled_blocks(tmp_path, capsys):
    code = main(["solve", "--preset", "decoupled-blocks", "--out", str(tmp_path)])
    assert code == 0
    err = float(capsys.readouterr().out.split("oracle error:")[1].strip())
    assert err <= 1e-12


def test_solve_unknown_preset_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--preset", "nope"])
    assert exc.value.code == 2


def test_solve_block_description_file(tmp_path, capsys):
    from test_blocks import BLOCK_FILE
    path = tmp_path / "blocks.cfg"
    path.write_text(BLOCK_FILE)
    code = main(["solve", "--blocks", str(path), "--out", str(tmp_path / "out"),
                 "--max-iters", "50"])
    assert code == 0
    out = capsys.readouterr().out
    assert "2 primal / 1 dual blocks" in out
    assert (tmp_path / "out" / "metrics.csv").exists()
    assert (tmp_path / "out" / "manifest.cfg").exists()


def test_solve_missing_block_file_exits_two(tmp_path, capsys):
    code = main(["solve", "--blocks", str(tmp_path / "none.cfg"),
                 "--out", str(tmp_path / "out")])
    assert code == 2


# ---------------------------------------------------------------------------
# deblur and sweep

DEBLUR_ARGS = ["--set", "rows=16", "--set", "cols=16", "--set", "max_iters=25"]


def test_deblur_runs_on_phantom(tmp_path, capsys):
    code = main(["deblur", "--out", str(tmp_path)] + DEBLUR_ARGS)
    assert code == 0
    out = capsys.readouterr().out
    assert "final objective" in out
    assert (tmp_path / "metrics.csv").exists()


def test_deblur_missing_image_exits_two(tmp_path, capsys):
    code = main(["deblur", "--image", str(tmp_path / "nope.pgm"),
                 "--out", str(tmp_path)] + DEBLUR_ARGS)
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_deblur_reruns_byte_identical(tmp_path):
    main(["deblur", "--out", str(tmp_path / "a"), "--seed", "7"] + DEBLUR_ARGS)
    main(["deblur", "--out", str(tmp_path / "b"), "--seed", "7"] + DEBLUR_ARGS)
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == \
        (tmp_path / "b" / "metrics.csv").read_bytes()


def test_deblur_config_file_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[deblur]\nrows = 16\ncols = 16\nmax_iters = 10\nlambda1 = 0.02\n")
    code = main(["deblur", "--config", str(cfg), "--out", str(tmp_path / "out"),
                 "--set", "lambda1=0.05"])
    assert code == 0
    manifest = (tmp_path / "out" / "manifest.cfg").read_text()
    assert "lambda1 = 0.05" in manifest


def test_deblur_unknown_config_key_exits_two(tmp_path, capsys):
    code = main(["deblur", "--out", str(tmp_path), "--set", "bogus=1"])
    assert code == 2


def test_sweep_parallel(tmp_path, capsys):
    code = main(["sweep", "--param", "lambda1=0.01,0.02", "--out", str(tmp_path),
                 "--parallel", "2"] + DEBLUR_ARGS)
    assert code == 0
    assert (tmp_path / "lambda1=0.01" / "manifest.cfg").exists()
    assert (tmp_path / "lambda1=0.02" / "manifest.cfg").exists()
    out = capsys.readouterr().out
    assert "lambda1=0.01" in out and "lambda1=0.02" in out


# ---------------------------------------------------------------------------
# selftest

def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") >= 5
