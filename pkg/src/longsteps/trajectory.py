"""First-order data, gradient descent rollouts and the cocoercivity forms Q_{i,j}."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from longsteps.schedules import StepSchedule

STAR = "star"

Index = Union[int, str]


class RolloutError(ArithmeticError):
    """Gradient descent produced a non-finite value or gradient."""


@dataclass(frozen=True)
class FirstOrderPoint:
    x: np.ndarray
    f: float
    g: np.ndarray

    def __post_init__(self):
        if np.shape(self.x) != np.shape(self.g):
            raise ValueError("x and g must have the same dimension")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Iterates x_0..x_N with values and gradients, plus an optional minimizer.

    ``x``, ``f``, ``g`` hold the data as produced; ``fn`` and ``gn`` hold the
    values and gradients of f/L, which is what every Q-form is evaluated on.
    """

    x: np.ndarray
    f: np.ndarray
    g: np.ndarray
    schedule: StepSchedule
    L: float = 1.0
    star: Optional[FirstOrderPoint] = None

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"smoothness constant must be positive, got {self.L}")
        if self.x.ndim != 2 or self.x.shape != self.g.shape or self.f.shape != (len(self.x),):
            raise ValueError("inconsistent trajectory shapes")
        if len(self.x) != len(self.schedule) + 1:
            raise ValueError("trajectory needs exactly one more point than steps")
        if self.star is not None and np.any(self.star.g != 0):
            raise ValueError("the minimizer must carry a zero gradient")
        object.__setattr__(self, "fn", self.f / self.L)
        object.__setattr__(self, "gn", self.g / self.L)
        for arr in (self.x, self.f, self.g, self.fn, self.gn):
            arr.flags.writeable = False

    @property
    def n_steps(self) -> int:
        return len(self.schedule)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def points(self) -> list[FirstOrderPoint]:
        return [FirstOrderPoint(self.x[i], self.f[i], self.g[i]) for i in range(len(self.x))]

    def _normalized(self, i: Index):
        if i == STAR:
            if self.star is None:
                raise LookupError("trajectory has no minimizer attached")
            return self.star.x, self.star.f / self.L, np.zeros(self.dim)
        return self.x[i], self.fn[i], self.gn[i]


def gd_rollout(fn, x0, s: StepSchedule) -> Trajectory:
    """Run x_{i+1} = x_i - (h_i / L) grad f(x_i) for every step in ``s``."""
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.ndim != 1:
        raise ValueError("x0 must be a vector")
    if fn.dim is not None and x.shape[0] != fn.dim:
        raise ValueError(f"x0 has dimension {x.shape[0]}, function expects {fn.dim}")
    h = s.as_floats()
    n = len(h)
    xs = np.empty((n + 1, x.shape[0]))
    gs = np.empty_like(xs)
    fs = np.empty(n + 1)
    # Kahan compensation: long runs of small steps from a distant start otherwise lose digits
    comp = np.zeros_like(x)
    for i in range(n + 1):
        xs[i] = x
        fs[i] = fn.value(x)
        gs[i] = fn.gradient(x)
        if not (np.isfinite(fs[i]) and np.all(np.isfinite(gs[i]))):
            raise RolloutError(f"non-finite value or gradient at iterate {i}")
        if i < n:
            step = -(h[i] / fn.L) * gs[i] - comp
            nxt = x + step
            comp = (nxt - x) - step
            x = nxt
    star = None
    if fn.minimizer is not None:
        xstar = np.broadcast_to(np.asarray(fn.minimizer, dtype=float), x.shape).copy()
        star = FirstOrderPoint(xstar, float(fn.min_value), np.zeros_like(xstar))
    return Trajectory(xs, fs, gs, s, float(fn.L), star)


def free_rollout(f_values: Sequence[float], gradients, x0, s: StepSchedule) -> Trajectory:
    """Trajectory with arbitrary values and gradients tied only by the GD recursion (L = 1)."""
    f = np.asarray(f_values, dtype=float).copy()
    g = np.asarray(gradients, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    g = g.copy()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = len(s)
    if len(f) != n + 1 or len(g) != n + 1:
        raise ValueError(f"schedule of {n} steps needs {n + 1} values and gradients")
    if g.shape[1] != x0.shape[0]:
        raise ValueError("gradient dimension does not match x0")
    h = s.as_floats()
    # x_i = x_0 - sum_{l<i} h_l g_l, accumulated sequentially like the recursion
    x = np.empty_like(g)
    x[0] = x0
    for i in range(n):
        x[i + 1] = x[i] - h[i] * g[i]
    return Trajectory(x, f, g, s, 1.0, None)


def random_free_trajectory(s: StepSchedule, dim: int = 4, seed: int = 0, scale: float = 1.0):
    """Free trajectory with standard Gaussian values, gradients and start point."""
    rng = np.random.default_rng(seed)
    n = len(s) + 1
    f = scale**2 * rng.standard_normal(n)
    g = scale * rng.standard_normal((n, dim))
    x0 = scale * rng.standard_normal(dim)
    return free_rollout(f, g, x0, s)


def q_form(t: Trajectory, i: Index, j: Index) -> float:
    """Q_{i,j} = f_i - f_j - <g_j, x_i - x_j> - |g_i - g_j|^2 / 2 on f/L data."""
    if i == j:
        raise ValueError("Q_{i,i} is identically zero and never used")
    xi, fi, gi = t._normalized(i)
    xj, fj, gj = t._normalized(j)
    dg = gi - gj
    return float(fi - fj - gj @ (xi - xj) - 0.5 * (dg @ dg))


def q_pairs(t: Trajectory, rows, cols) -> np.ndarray:
    """Vector of Q_{rows[m], cols[m]} over integer index pairs."""
    x, f, g = t.x, t.fn, t.gn
    gi, gj = g[rows], g[cols]
    dg = gi - gj
    return (
        f[rows]
        - f[cols]
        - np.einsum("md,md->m", gj, x[rows] - x[cols])
        - 0.5 * np.einsum("md,md->m", dg, dg)
    )


def q_matrix(t: Trajectory) -> np.ndarray:
    """Dense matrix of Q_{i,j} over the iterates (star excluded); zero diagonal."""
    x, f, g = t.x, t.fn, t.gn
    gx = g @ x.T  # gx[j, i] = <g_j, x_i>
    gg = g @ g.T
    sq = np.diag(gg)
    q = (
        f[:, None]
        - f[None, :]
        - gx.T
        + np.diag(gx)[None, :]
        - 0.5 * (sq[:, None] + sq[None, :] - 2 * gg)
    )
    np.fill_diagonal(q, 0.0)
    return q


def trajectory_to_dict(t: Trajectory) -> dict:
    def num(v):
        return repr(float(v))

    return {
        "L": num(t.L),
        "schedule_ref": t.schedule.ref(),
        "points": [
            {"x": [num(v) for v in t.x[i]], "f": num(t.f[i]), "g": [num(v) for v in t.g[i]]}
            for i in range(len(t.x))
        ],
        "star": None
        if t.star is None
        else {"x": [num(v) for v in t.star.x], "f": num(t.star.f), "g": [num(v) for v in t.star.g]},
    }
