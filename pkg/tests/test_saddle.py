import numpy as np
import pytest
from scipy.optimize import linprog

from pdhf.linops import matrix_map
from pdhf.prox import ForwardOp, ResolventOp, box_resolvent, prox_l1
from pdhf.presets import bilinear_saddle
from pdhf.saddle import (SaddleProblem, build_saddle_spec, coupling_forward,
                         coupling_monotonicity_violation, run_saddle,
                         two_track_iterates)
from pdhf.solver import (IterState, StepSizes, condat_vu_step, select_step,
                         validate_steps)


def _bilinear_problem(m_mat, **extra):
    # coupling x' M y: the x-gradient is M y, the y-gradient M' x
    m_mat = np.asarray(m_mat, dtype=float)
    return SaddleProblem(
        x_dim=m_mat.shape[0], y_dim=m_mat.shape[1],
        coupling_grad_x=lambda x, y: m_mat @ y,
        coupling_grad_y=lambda x, y: m_mat.T @ x,
        coupling_lipschitz=float(np.linalg.norm(m_mat, 2)),
        **extra,
    )


def test_no_coupling_dispatches_to_condat_vu():
    sp = SaddleProblem(
        x_dim=3, y_dim=2,
        x_prox=box_resolvent(3, -1, 1),
        x_smooth_grad=ForwardOp(3, "cocoercive", 1.0, lambda x: x),
        y_smooth_grad=ForwardOp(2, "cocoercive", 2.0, lambda y: 0.5 * y),
    )
    spec = build_saddle_spec(sp)
    assert spec.lipschitz is None
    assert select_step(spec) is condat_vu_step
    assert spec.cocoercive.constant == 1.0  # min of the track constants


def test_bilinear_coupling_is_skew():
    rng = np.random.default_rng(0)
    m_mat = rng.standard_normal((4, 6))
    sp = _bilinear_problem(m_mat)
    op = coupling_forward(sp)
    assert op.constant == pytest.approx(float(np.linalg.norm(m_mat, 2)))
    for _ in range(50):
        v = rng.standard_normal(10)
        assert abs(float(op(v) @ v)) <= 1e-12 * float(v @ v)
    assert coupling_monotonicity_violation(sp, n_pairs=100, seed=1) <= 1e-10


def test_blockdiag_coupling_map_norm_is_max():
    rng = np.random.default_rng(1)
    l1_mat = rng.standard_normal((3, 4))
    l2_mat = rng.standard_normal((2, 5))
    sp = SaddleProblem(
        x_dim=4, y_dim=5,
        x_map=matrix_map(l1_mat), x_composed_prox=ResolventOp(3, lambda t, v: v),
        y_map=matrix_map(l2_mat), y_composed_prox=ResolventOp(2, lambda t, v: v),
    )
    spec = build_saddle_spec(sp)
    expected = max(float(np.linalg.norm(l1_mat, 2)), float(np.linalg.norm(l2_mat, 2)))
    assert spec.coupling.norm_bound == pytest.approx(expected, rel=1e-14)
    # stacked apply hits each track's map on its own slice
    v = np.arange(9.0)
    np.testing.assert_allclose(spec.coupling(v)[:3], l1_mat @ v[:4])
    np.testing.assert_allclose(spec.coupling(v)[3:], l2_mat @ v[4:])


def test_scalar_bilinear_game_converges_to_origin():
    result = bilinear_saddle(max_iters=10000)
    assert result.oracle_error <= 1e-6
    assert result.report.termination in ("max_iters", "tolerance_met")


def test_unrolled_matches_assembled():
    rng = np.random.default_rng(2)
    m_mat = 0.4 * rng.standard_normal((3, 3))
    mu = 1.5
    ones_row_x = matrix_map(np.ones((1, 3)))
    ones_row_y = matrix_map(np.ones((1, 3)))

    def shifted_l1(dim):
        return ResolventOp(dim, lambda t, v: 1.0 + prox_l1(v - 1.0, mu, t))

    sp = _bilinear_problem(
        m_mat,
        x_prox=box_resolvent(3, 0.0, 1.0),
        y_prox=box_resolvent(3, 0.0, 1.0),
        x_map=ones_row_x, x_composed_prox=shifted_l1(1),
        y_map=ones_row_y, y_composed_prox=shifted_l1(1),
        x_smooth_grad=ForwardOp(3, "cocoercive", 10.0, lambda x: 0.1 * x),
        y_smooth_grad=ForwardOp(3, "cocoercive", 10.0, lambda y: 0.1 * y),
    )
    spec = build_saddle_spec(sp)
    steps = StepSizes(tau=0.2, sigma=0.5, epsilon=0.05)
    assert validate_steps(spec, steps).valid

    x0 = rng.standard_normal(3)
    y0 = rng.standard_normal(3)
    state = IterState.initial(np.concatenate([x0, y0]), np.zeros(spec.dual_dim))
    step_fn = select_step(spec)
    for x_lit, y_lit, duals in two_track_iterates(sp, steps, x0, y0, n_iters=80):
        state = step_fn(spec, steps, state)
        assert np.max(np.abs(state.x[:3] - x_lit)) <= 1e-12
        assert np.max(np.abs(state.x[3:] - y_lit)) <= 1e-12
        assert np.max(np.abs(state.u[0] - duals["x"])) <= 1e-12
        assert np.max(np.abs(state.u[1] - duals["y"])) <= 1e-12


def test_unrolled_matches_assembled_without_smooth_terms():
    # with no smooth terms the assembled spec dispatches to the variant
    # without the cocoercive step; the literal recurrence must track it
    rng = np.random.default_rng(3)
    m_mat = 0.4 * rng.standard_normal((3, 3))
    mu = 1.0

    def shifted_l1(dim):
        return ResolventOp(dim, lambda t, v: 1.0 + prox_l1(v - 1.0, mu, t))

    sp = _bilinear_problem(
        m_mat,
        x_prox=box_resolvent(3, 0.0, 1.0),
        y_prox=box_resolvent(3, 0.0, 1.0),
        x_map=matrix_map(np.ones((1, 3))), x_composed_prox=shifted_l1(1),
        y_map=matrix_map(np.ones((1, 3))), y_composed_prox=shifted_l1(1),
    )
    spec = build_saddle_spec(sp)
    assert spec.cocoercive is None
    from pdhf.solver import pdfbf_step
    assert select_step(spec) is pdfbf_step
    steps = StepSizes(tau=0.2, sigma=0.5)
    assert validate_steps(spec, steps).valid
    x0 = rng.standard_normal(3)
    y0 = rng.standard_normal(3)
    state = IterState.initial(np.concatenate([x0, y0]), np.zeros(spec.dual_dim))
    for x_lit, y_lit, duals in two_track_iterates(sp, steps, x0, y0, n_iters=60):
        state = pdfbf_step(spec, steps, state)
        assert np.max(np.abs(state.x[:3] - x_lit)) <= 1e-12
        assert np.max(np.abs(state.x[3:] - y_lit)) <= 1e-12


def test_unrolled_matches_assembled_single_composed_track():
    # only the x track carries a composed linear term; the dual space is
    # that single block
    rng = np.random.default_rng(4)
    m_mat = 0.3 * rng.standard_normal((2, 3))
    lin = matrix_map(rng.standard_normal((2, 2)))
    sp = _bilinear_problem(
        m_mat,
        x_prox=box_resolvent(2, -1.0, 1.0),
        x_map=lin,
        x_composed_prox=ResolventOp(2, lambda t, v: np.sign(v) * np.maximum(np.abs(v) - 0.2 * t, 0.0)),
        y_smooth_grad=ForwardOp(3, "cocoercive", 5.0, lambda y: 0.2 * y),
    )
    spec = build_saddle_spec(sp)
    assert spec.dual_dim == 2
    assert spec.coupling.norm_bound == lin.norm_bound
    steps = StepSizes(tau=0.15, sigma=0.3, epsilon=0.05)
    assert validate_steps(spec, steps).valid
    x0 = rng.standard_normal(2)
    y0 = rng.standard_normal(3)
    state = IterState.initial(np.concatenate([x0, y0]), np.zeros(2))
    step_fn = select_step(spec)
    for x_lit, y_lit, duals in two_track_iterates(sp, steps, x0, y0, n_iters=60):
        state = step_fn(spec, steps, state)
        assert np.max(np.abs(state.x[:2] - x_lit)) <= 1e-12
        assert np.max(np.abs(state.x[2:] - y_lit)) <= 1e-12
        assert np.max(np.abs(state.u - duals["x"])) <= 1e-12


def test_matrix_game_value_matches_linear_program():
    # cyclic 3x3 zero-sum game with unique interior equilibrium; the
    # simplex constraint enters as a box plus an exact-penalty term on
    # the coordinate sum
    m_mat = np.array([[0.0, -1.0, 1.0],
                      [1.0, 0.0, -1.0],
                      [-1.0, 1.0, 0.0]])
    mu = 2.0

    def shifted_l1(dim):
        return ResolventOp(dim, lambda t, v: 1.0 + prox_l1(v - 1.0, mu, t))

    sp = _bilinear_problem(
        m_mat,
        x_prox=box_resolvent(3, 0.0, 1.0),
        y_prox=box_resolvent(3, 0.0, 1.0),
        x_map=matrix_map(np.ones((1, 3))), x_composed_prox=shifted_l1(1),
        y_map=matrix_map(np.ones((1, 3))), y_composed_prox=shifted_l1(1),
    )
    steps = StepSizes(tau=0.25, sigma=0.6)
    start = np.full(3, 0.4)
    report = run_saddle(sp, steps, x0=start, y0=start, max_iters=60000)
    x_hat, y_hat = report.x[:3], report.x[3:]

    # LP oracle for the row player's game value
    res = linprog(c=[0.0, 0.0, 0.0, 1.0],
                  A_ub=np.hstack([m_mat.T, -np.ones((3, 1))]),
                  b_ub=np.zeros(3),
                  A_eq=[[1.0, 1.0, 1.0, 0.0]], b_eq=[1.0],
                  bounds=[(0, None)] * 3 + [(None, None)])
    assert res.success
    value_lp = float(res.x[3])
    assert abs(float(x_hat @ (m_mat @ y_hat)) - value_lp) <= 1e-4
    assert abs(float(x_hat.sum()) - 1.0) <= 1e-3
    assert abs(float(y_hat.sum()) - 1.0) <= 1e-3


def test_saddle_validation_errors():
    with pytest.raises(ValueError):
        SaddleProblem(x_dim=2, y_dim=2, x_map=matrix_map(np.eye(2)))
    with pytest.raises(ValueError):
        SaddleProblem(x_dim=2, y_dim=2,
                      coupling_grad_x=lambda x, y: y,
                      coupling_grad_y=lambda x, y: x,
                      coupling_lipschitz=0.0)
