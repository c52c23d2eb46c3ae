import numpy as np
import pytest

from longsteps.functions import (
    Huber,
    Quadratic,
    huber,
    probe_smoothness,
    quadratic,
    tight_eta_left,
    tight_eta_right,
)
from longsteps.schedules import h_right
from longsteps.trajectory import gd_rollout

from conftest import SQRT2


def test_quadratic_worst_case():
    q = quadratic([2.0], L=2.0)
    assert q.value([3.0]) == 9.0
    np.testing.assert_array_equal(q.gradient([3.0]), [6.0])


def test_zero_quadratic():
    q = quadratic([0.0, 0.0, 0.0])
    assert q.value([1.0, 2.0, 3.0]) == 0
    assert np.all(q.gradient([1.0, 2.0, 3.0]) == 0)


@pytest.mark.parametrize("diag", [[-0.1], [1.5], [0.5, 2.0]])
def test_quadratic_rejects_bad_diagonal(diag):
    with pytest.raises(ValueError):
        quadratic(diag, L=1.0)


@pytest.mark.parametrize("L", [1.0, 2.5])
def test_huber_breakpoint_continuity(L):
    eta = 0.7
    fn = huber(eta, L)
    assert fn.value([eta]) == pytest.approx(L * eta**2 / 2)
    above = L * eta * (eta + 1e-12) - L * eta**2 / 2
    assert fn.value([eta + 1e-12]) == pytest.approx(above)
    assert fn.gradient([2 * eta])[0] == pytest.approx(L * eta)
    assert fn.gradient([-2 * eta])[0] == pytest.approx(-L * eta)
    assert fn.gradient([eta])[0] == pytest.approx(L * eta)


def test_huber_rejects_nonpositive_eta():
    with pytest.raises(ValueError):
        huber(0.0)
    with pytest.raises(ValueError):
        huber(-1.0)


def test_huber_lipschitz_across_breakpoint():
    fn = Huber(0.5)
    rng = np.random.default_rng(1)
    for _ in range(500):
        x = 0.5 + rng.uniform(-0.2, 0.2)
        y = -x if rng.random() < 0.5 else 0.5 + rng.uniform(-0.2, 0.2)
        assert abs(fn.gradient([x])[0] - fn.gradient([y])[0]) <= abs(x - y) + 1e-15


@pytest.mark.parametrize("fn", [Huber(0.3), Huber(2.0, L=4.0), Quadratic([0.1, 1.0, 0.5]), Quadratic([3.0], L=3.0)])
def test_probe_smoothness(fn):
    lip, gap = probe_smoothness(fn, n_probes=300)
    assert lip <= 1e-12
    assert gap <= 1e-12


def test_tight_breakpoints():
    assert tight_eta_left(1, 1.0) == pytest.approx(2 / 5)
    assert tight_eta_right(1, 1.0) == pytest.approx(1 / 4)
    assert tight_eta_right(2, 1.0) == pytest.approx(1 / (6 + 4 * SQRT2))
    assert tight_eta_right(2, 1.0) == pytest.approx(0.08579, abs=1e-5)
    assert tight_eta_left(1, -3.0) == pytest.approx(6 / 5)
    with pytest.raises(ValueError):
        tight_eta_left(1, 0.0)


@pytest.mark.parametrize("x0", [1.0, 2.5, 10.0])
def test_tight_huber_level_one_by_hand(x0):
    eta = 2 * x0 / 5
    fn = Huber(eta)
    t = gd_rollout(fn, [x0], h_right(1))
    # x_1 = x_0 - 1.5 * eta = x_0 - 3 x_0 / 5 = eta
    assert t.x[1, 0] == pytest.approx(eta, rel=1e-15, abs=0)
    assert 0.5 * t.g[1, 0] ** 2 == pytest.approx(t.f[0] / 4, rel=1e-14, abs=0)
