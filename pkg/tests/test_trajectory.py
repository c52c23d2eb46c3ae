import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from longsteps.functions import Huber, Quadratic, tight_eta_right
from longsteps.schedules import StepSchedule, composite, h_left, h_right, silver
from longsteps.trajectory import (
    STAR,
    RolloutError,
    free_rollout,
    gd_rollout,
    q_form,
    q_matrix,
    q_pairs,
    random_free_trajectory,
    trajectory_to_dict,
)

from conftest import SQRT2


def custom(entries):
    return StepSchedule("composite", 0, np.asarray(entries, dtype=float))


def test_one_step_on_half_square():
    t = gd_rollout(Quadratic([1.0]), [1.0], h_right(1))
    assert t.x[1, 0] == -0.5
    assert t.f[1] == 0.125
    assert t.star is not None and t.star.f == 0


@given(st.lists(st.floats(min_value=0.01, max_value=6), min_size=1, max_size=12), st.floats(-5, 5))
def test_quadratic_terminal_iterate_is_product(steps, x0):
    t = gd_rollout(Quadratic([1.0]), [x0], custom(steps))
    expected = x0 * np.prod([1 - h for h in steps])
    # x - h x cancels when h is near 1; bound the forward error by the growth of |x0| prod(1 + h)
    n = len(steps) + 1
    err = 4 * n * np.finfo(float).eps * abs(x0) * np.prod([1 + h for h in steps])
    err += 4 * n * np.finfo(float).smallest_subnormal * np.prod([1 + h for h in steps])  # subnormal start
    assert abs(t.x[-1, 0] - expected) <= err


def test_empty_schedule_keeps_start():
    t = gd_rollout(Quadratic([1.0, 0.5]), [1.0, 2.0], custom([]))
    assert t.x.shape == (1, 2)
    assert t.f[0] == pytest.approx(0.5 + 1.0)


def test_rollout_rejects_bad_start_dimension():
    with pytest.raises(ValueError):
        gd_rollout(Quadratic([1.0, 1.0]), [1.0], h_right(2))


def test_rollout_detects_overflow():
    class Exploding(Quadratic):
        def value(self, x):
            return math.inf

    with pytest.raises(RolloutError):
        gd_rollout(Exploding([1.0]), [1.0], h_right(2))


def test_free_rollout_zero_gradients():
    s = silver(3)
    t = free_rollout(np.arange(8.0), np.zeros((8, 3)), [1.0, 2.0, 3.0], s)
    assert np.all(t.x == [1.0, 2.0, 3.0])


def test_free_rollout_one_step():
    t = free_rollout([1.0, 0.0], [1.0, 0.0], [1.0], silver(1))
    np.testing.assert_allclose(t.x[:, 0], [1.0, 1 - SQRT2], rtol=1e-15)


def test_free_rollout_length_mismatch():
    with pytest.raises(ValueError):
        free_rollout([1.0, 2.0], np.zeros((3, 1)), [0.0], silver(1))


@pytest.mark.parametrize("seed", range(5))
def test_free_rollout_step_invariant(seed):
    s = h_left(6)
    t = random_free_trajectory(s, dim=3, seed=seed)
    h = s.entries
    resid = t.x[1:] - t.x[:-1] + h[:, None] * t.g[:-1]
    scale = np.abs(t.x).max()
    assert np.abs(resid).max() <= 4 * np.finfo(float).eps * scale


def test_free_rollout_step_invariant_exact_on_dyadic_data():
    s = custom([1.5, 0.5, 2.0])
    g = np.array([[1.0], [0.25], [-2.0], [4.0]])
    t = free_rollout([0.0, 1.0, 2.0, 3.0], g, [0.5], s)
    assert np.all(t.x[1:] - t.x[:-1] + s.entries[:, None] * g[:-1] == 0)


def test_q_form_example():
    t = free_rollout([1.0, 0.0], [1.0, 0.0], [1.0], silver(1))
    assert q_form(t, 1, 0) == pytest.approx(SQRT2 - 1.5, rel=1e-14, abs=0)
    # closed form from the x_1 = x_0 - sqrt2 g_0 substitution
    f, g = t.f, t.g[:, 0]
    assert q_form(t, 1, 0) == pytest.approx(f[1] - f[0] + SQRT2 * g[0] ** 2 - 0.5 * (g[0] - g[1]) ** 2)


def test_q_form_rejects_diagonal():
    t = random_free_trajectory(silver(2))
    with pytest.raises(ValueError):
        q_form(t, 1, 1)


def test_q_form_star_needs_minimizer():
    t = random_free_trajectory(silver(2))
    with pytest.raises(LookupError):
        q_form(t, 0, STAR)


@pytest.mark.parametrize(
    "fn, x0",
    [
        (Quadratic([1.0, 0.3, 0.0, 0.7]), [1.0, -2.0, 0.5, 3.0]),
        (Huber(0.3), [2.0]),
        (Huber(5.0, L=3.0), [-7.0]),
        (Quadratic([2.0, 0.5], L=2.0), [1.0, 1.0]),
    ],
)
@pytest.mark.parametrize("schedule", [h_left(4), h_right(4), composite(3)])
def test_q_forms_nonnegative_on_convex_data(fn, x0, schedule):
    t = gd_rollout(fn, x0, schedule)
    idx = list(range(len(t.x))) + [STAR]
    scale = max(1.0, float(np.max(np.abs(t.fn))), float(np.max(np.abs(t.x))) ** 2)
    for i in idx:
        for j in idx:
            if i != j:
                assert q_form(t, i, j) >= -1e-10 * scale


@pytest.mark.parametrize("L", [0.25, 3.0, 8.0])
def test_l_normalization(L):
    diag = np.array([1.0, 0.5, 0.1])
    a = gd_rollout(Quadratic(L * diag, L), [1.0, -1.0, 2.0], h_right(5))
    b = gd_rollout(Quadratic(diag, 1.0), [1.0, -1.0, 2.0], h_right(5))
    np.testing.assert_allclose(a.x, b.x, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(a.fn, b.f, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(q_matrix(a), q_matrix(b), rtol=1e-10, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_q_scales_quadratically(seed, scale):
    s = h_right(3)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(8)
    g = rng.standard_normal((8, 2))
    base = free_rollout(f, g, [0.0, 0.0], s)
    scaled = free_rollout(scale**2 * f, scale * g, [0.0, 0.0], s)
    np.testing.assert_allclose(q_matrix(scaled), scale**2 * q_matrix(base), rtol=1e-9, atol=1e-9 * scale**2)


def test_q_matrix_and_pairs_match_q_form():
    t = random_free_trajectory(h_left(3), dim=2, seed=3)
    q = q_matrix(t)
    n = len(t.x)
    rows, cols = np.nonzero(~np.eye(n, dtype=bool))
    np.testing.assert_allclose(q_pairs(t, rows, cols), q[rows, cols], rtol=1e-12, atol=1e-12)
    for i in range(n):
        for j in range(n):
            if i != j:
                assert q[i, j] == pytest.approx(q_form(t, i, j), rel=1e-12, abs=1e-12)
    assert np.all(np.diag(q) == 0)


def test_trajectory_export():
    t = gd_rollout(Huber(0.25), [1.0], h_right(2))
    d = trajectory_to_dict(t)
    assert d["schedule_ref"] == {"kind": "right", "k": 2}
    assert len(d["points"]) == 4
    assert float(d["points"][1]["x"][0]) == t.x[1, 0]
    assert d["star"]["g"] == ["0.0"]


def test_trajectory_rejects_nonzero_star_gradient():
    from longsteps.trajectory import FirstOrderPoint, Trajectory

    s = silver(1)
    with pytest.raises(ValueError):
        Trajectory(
            np.zeros((2, 1)), np.zeros(2), np.zeros((2, 1)), s, 1.0,
            FirstOrderPoint(np.zeros(1), 0.0, np.ones(1)),
        )


def test_long_linear_run_matches_high_precision():
    import mpmath

    s = composite(10)
    fn = Huber(tight_eta_right(10, 2.5))
    t = gd_rollout(fn, [-2.5], s)
    with mpmath.workdps(40):
        x, eta = mpmath.mpf(-2.5), mpmath.mpf(fn.eta)
        for h in s.as_floats():
            g = x if abs(x) <= eta else eta * mpmath.sign(x)
            x -= mpmath.mpf(h) * g
        ref = float(x)
    assert t.x[-1, 0] == pytest.approx(ref, rel=1e-12, abs=0)
