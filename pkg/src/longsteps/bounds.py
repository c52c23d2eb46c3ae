"""Guarantee evaluation, table reproduction, tightness witnesses and restarts."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from longsteps.constants import asymptotic_constant, r_next, r_value, rho
from longsteps.functions import Huber, Quadratic, SmoothConvexFn, tight_eta_left, tight_eta_right
from longsteps.report import BoundReport, equality_report, inequality_report
from longsteps.schedules import composite, h_left, h_right
from longsteps.trajectory import gd_rollout

TIGHTNESS_TOL = 1e-10
VIOLATION_TOL = 1e-10

# Reference guarantees for N = 1, 3, 7, 15, 31: silver schedule, then branch-and-bound schedules.
SILVER_REF = (0.182, 0.0798, 0.0344, 0.0145, 0.00606)
BNB_REF = (0.125, 0.0429, 0.0163, 0.00659, 0.00272)


def bound_thm1(k: int, L: float, initial_gap: float) -> float:
    """Bound on |grad f(x_N)|^2 / 2 after h_left^(k): L (f(x_0) - f_*) / r_k."""
    if L <= 0 or initial_gap < 0:
        raise ValueError("need L > 0 and a nonnegative initial gap")
    return L * initial_gap / r_value(k)


def bound_thm2(k: int, L: float, dist: float) -> float:
    """Bound on f(x_N) - f_* after h_right^(k): (L/2) |x_0 - x_*|^2 / r_k."""
    if L <= 0 or dist < 0:
        raise ValueError("need L > 0 and a nonnegative distance")
    return 0.5 * L * dist**2 / r_value(k)


def bound_thm3(k: int, L: float, dist: float) -> float:
    """Bound on |grad f(x_N)| after the composite schedule: L |x_0 - x_*| / r_k."""
    if L <= 0 or dist < 0:
        raise ValueError("need L > 0 and a nonnegative distance")
    return L * dist / r_value(k)


def chained_thm3(k: int, L: float, dist: float) -> float:
    """Composite bound obtained by feeding the objective-gap bound into the gradient bound."""
    return math.sqrt(2 * bound_thm1(k, L, bound_thm2(k, L, dist)))


@dataclass(frozen=True)
class Table1Row:
    N: int
    ours: float
    silver_ref: float
    bnb_ref: float


def table1(k_range=range(1, 6)) -> list[Table1Row]:
    """Worst-case objective gap 1/(2 r_k) for 1-smooth f and |x_0 - x_*| <= 1.

    The reference columns exist only for k = 1..5; other levels report NaN.
    """
    ks = list(k_range)
    rows = []
    r, level = 4.0, 1
    for k in ks:
        if k < 1:
            raise ValueError(f"level k must be >= 1, got {k}")
        if k < level:
            r, level = 4.0, 1
        while level < k:
            r = r_next(level, r)
            level += 1
        ref = k - 1 if k <= len(SILVER_REF) else None
        rows.append(
            Table1Row(
                N=2**k - 1,
                ours=1 / (2 * r),
                silver_ref=SILVER_REF[ref] if ref is not None else math.nan,
                bnb_ref=BNB_REF[ref] if ref is not None else math.nan,
            )
        )
    return rows


def round_sig(x: float, sig: int = 3) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, sig - 1 - math.floor(math.log10(abs(x))))


def asymptotic_ratio(k: int) -> float:
    """bound_thm2(k, 1, 1) * N**log2(rho) * 2 gamma*; tends to 1 from below."""
    n = 2**k - 1
    return bound_thm2(k, 1.0, 1.0) * n ** math.log2(rho()) * asymptotic_constant() * 2


# -- measured quantities for each guarantee ---------------------------------


def _gap(fn, traj, i):
    return traj.f[i] - fn.min_value


def measure_thm1(fn: SmoothConvexFn, x0, k: int) -> BoundReport:
    traj = gd_rollout(fn, x0, h_left(k))
    g = traj.g[-1]
    measured = 0.5 * float(g @ g)
    bound = bound_thm1(k, fn.L, _gap(fn, traj, 0))
    return inequality_report("thm1", bound, measured, VIOLATION_TOL * max(1.0, bound), name=f"thm1 k={k}")


def measure_thm2(fn: SmoothConvexFn, x0, k: int) -> BoundReport:
    traj = gd_rollout(fn, x0, h_right(k))
    measured = _gap(fn, traj, -1)
    dist = float(np.linalg.norm(traj.x[0] - traj.star.x))
    bound = bound_thm2(k, fn.L, dist)
    return inequality_report("thm2", bound, measured, VIOLATION_TOL * max(1.0, bound), name=f"thm2 k={k}")


def measure_thm3(fn: SmoothConvexFn, x0, k: int) -> BoundReport:
    traj = gd_rollout(fn, x0, composite(k))
    measured = float(np.linalg.norm(traj.g[-1]))
    dist = float(np.linalg.norm(traj.x[0] - traj.star.x))
    bound = bound_thm3(k, fn.L, dist)
    return inequality_report("thm3", bound, measured, VIOLATION_TOL * max(1.0, bound), name=f"thm3 k={k}")


MEASURES = {"thm1": measure_thm1, "thm2": measure_thm2, "thm3": measure_thm3}


def tightness(k: int, x0: float = 1.0, L: float = 1.0, tol: float = TIGHTNESS_TOL) -> list[BoundReport]:
    """Run the quadratic and tuned Huber witnesses against all three guarantees.

    Every report is an equality check: the measured quantity must match the
    bound to relative ``tol``.
    """
    witnesses = {
        "thm1": [("quadratic", Quadratic([L], L)), ("huber", Huber(tight_eta_left(k, x0), L))],
        "thm2": [("quadratic", Quadratic([L], L)), ("huber", Huber(tight_eta_right(k, x0), L))],
        "thm3": [("quadratic", Quadratic([L], L)), ("huber", Huber(tight_eta_right(k, x0), L))],
    }
    reports = []
    for claim, fns in witnesses.items():
        for label, fn in fns:
            rep = MEASURES[claim](fn, [x0], k)
            reports.append(
                equality_report(
                    claim, rep.theoretical, rep.measured, tol, name=f"{claim} {label} k={k}", witness=repr(fn)
                )
            )
    return reports


def random_quadratic(rng: np.random.Generator, max_dim: int = 8, L: float = 1.0) -> Quadratic:
    d = int(rng.integers(1, max_dim + 1))
    return Quadratic(L * rng.uniform(0, 1, d), L)


def no_violation_sweep(n_instances: int = 100, k_max: int = 6, seed: int = 0) -> list[BoundReport]:
    """Random diagonal quadratics and Huber functions against every guarantee."""
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(n_instances):
        fn = random_quadratic(rng)
        x0 = rng.standard_normal(fn.dim)
        k = int(rng.integers(1, k_max + 1))
        reports.extend(MEASURES[c](fn, x0, k) for c in MEASURES)
    for _ in range(n_instances):
        fn = Huber(float(rng.uniform(0.01, 2.0)))
        x0 = [float(rng.uniform(-3, 3))]
        k = int(rng.integers(1, k_max + 1))
        reports.extend(MEASURES[c](fn, x0, k) for c in MEASURES)
    return reports


# -- restarting ---------------------------------------------------------------


def restart_run(fn: SmoothConvexFn, k: int, sweeps: int, mu: float, x0) -> list[float]:
    """Objective gaps after 0, 1, ..., ``sweeps`` passes of h_left^(k).

    ``fn`` must be 1-smooth with a known minimum and satisfy
    |grad f|^2 / 2 >= mu (f - f_*); that condition is the caller's to ensure.
    """
    if not 0 < mu <= 1:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    if fn.min_value is None:
        raise ValueError("restart analysis needs the minimum value")
    if sweeps < 0:
        raise ValueError("sweeps must be nonnegative")
    if r_value(k) < 2 / mu:
        warnings.warn(
            f"r_{k} = {r_value(k):.4g} < 2/mu = {2 / mu:.4g}; sweeps are not guaranteed to halve the gap",
            RuntimeWarning,
            stacklevel=2,
        )
    s = h_left(k)
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    gaps = [fn.value(x) - fn.min_value]
    for _ in range(sweeps):
        traj = gd_rollout(fn, x, s)
        x = traj.x[-1]
        gaps.append(traj.f[-1] - fn.min_value)
    return gaps


def check_restart(gaps, k: int, mu: float, tol: float = VIOLATION_TOL) -> list[BoundReport]:
    """Per-sweep contraction gap_{t+1} <= gap_t / (mu r_k)."""
    factor = 1 / (mu * r_value(k))
    return [
        inequality_report(
            "restart", prev * factor, cur, tol * max(prev, 1e-300), name=f"sweep {t + 1}", ratio=cur / prev if prev else 0.0
        )
        for t, (prev, cur) in enumerate(zip(gaps[:-1], gaps[1:]))
    ]


def restart_quadratic(dim: int, mu: float, seed: int = 0) -> Quadratic:
    """Diagonal quadratic with eigenvalues in [mu, 1], both ends attained."""
    rng = np.random.default_rng(seed)
    diag = rng.uniform(mu, 1.0, dim)
    diag[0] = mu
    if dim > 1:
        diag[-1] = 1.0
    return Quadratic(diag, 1.0)
