"""Smooth convex test functions, including the quadratic and Huber worst cases."""

from __future__ import annotations

import numpy as np

from longsteps.constants import r_value


class SmoothConvexFn:
    """Interface for an L-smooth convex objective.

    Subclasses set ``L``, ``dim`` (None if any dimension works), and optionally
    ``minimizer`` / ``min_value``.
    """

    L: float = 1.0
    dim = None
    minimizer = None
    min_value = None

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError


class Quadratic(SmoothConvexFn):
    """f(x) = sum(diag * x**2) / 2 with every diag entry in [0, L]."""

    def __init__(self, diag, L: float = 1.0):
        diag = np.atleast_1d(np.asarray(diag, dtype=float))
        if L <= 0:
            raise ValueError(f"L must be positive, got {L}")
        if np.any(diag < 0) or np.any(diag > L):
            raise ValueError(f"diagonal entries must lie in [0, {L}]")
        self.diag = diag
        self.L = float(L)
        self.dim = len(diag)
        self.minimizer = np.zeros(self.dim)
        self.min_value = 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(np.dot(self.diag * x, x))

    def gradient(self, x):
        return self.diag * np.asarray(x, dtype=float)

    def __repr__(self):
        return f"Quadratic(diag={self.diag.tolist()}, L={self.L})"


class Huber(SmoothConvexFn):
    """Univariate Huber function: (L/2) x^2 inside |x| <= eta, linear outside."""

    dim = 1

    def __init__(self, eta: float, L: float = 1.0):
        if not eta > 0:
            raise ValueError(f"breakpoint eta must be positive, got {eta}")
        if L <= 0:
            raise ValueError(f"L must be positive, got {L}")
        self.eta = float(eta)
        self.L = float(L)
        self.minimizer = np.zeros(1)
        self.min_value = 0.0

    def value(self, x):
        a = abs(float(np.asarray(x).reshape(-1)[0]))
        if a <= self.eta:
            return 0.5 * self.L * a * a
        return self.L * self.eta * a - 0.5 * self.L * self.eta**2

    def gradient(self, x):
        v = float(np.asarray(x).reshape(-1)[0])
        if abs(v) <= self.eta:
            return np.array([self.L * v])
        return np.array([self.L * self.eta * np.sign(v)])

    def __repr__(self):
        return f"Huber(eta={self.eta}, L={self.L})"


def quadratic(diag, L: float = 1.0) -> Quadratic:
    return Quadratic(diag, L)


def huber(eta: float, L: float = 1.0) -> Huber:
    return Huber(eta, L)


def _nonzero(x0):
    x0 = float(np.asarray(x0).reshape(-1)[0])
    if x0 == 0:
        raise ValueError("x0 must be nonzero")
    return x0


def tight_eta_left(k: int, x0) -> float:
    """Breakpoint making the gradient-norm bound for h_left an equality."""
    return 2 * abs(_nonzero(x0)) / (1 + r_value(k))


def tight_eta_right(k: int, x0) -> float:
    """Breakpoint making the objective-gap bound for h_right (and composite) tight."""
    return abs(_nonzero(x0)) / r_value(k)


def probe_smoothness(fn: SmoothConvexFn, n_probes: int = 200, seed: int = 0, spread: float = 3.0):
    """Largest observed violations of L-Lipschitz gradients and of the gap bound.

    Returns ``(lipschitz_excess, gap_excess)``; both are <= 0 (up to rounding)
    for a correct L-smooth convex function with known minimum.
    """
    rng = np.random.default_rng(seed)
    dim = fn.dim or 3
    scale = spread * (getattr(fn, "eta", 1.0))
    lip = -np.inf
    gap = -np.inf
    for _ in range(n_probes):
        x = scale * rng.standard_normal(dim)
        y = scale * rng.standard_normal(dim)
        gx, gy = fn.gradient(x), fn.gradient(y)
        lip = max(lip, np.linalg.norm(gx - gy) - fn.L * np.linalg.norm(x - y))
        if fn.min_value is not None:
            gap = max(gap, gx @ gx / (2 * fn.L) - (fn.value(x) - fn.min_value))
    return float(lip), float(gap)
