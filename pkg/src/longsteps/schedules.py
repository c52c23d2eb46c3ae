"""Silver, left-heavy, right-heavy and composite stepsize schedules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from longsteps.constants import FLOAT, alpha, beta, k_max_for, r_value, rho
from longsteps.report import BoundReport, equality_report

KINDS = ("silver", "left", "right", "composite")

R_IDENTITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StepSchedule:
    """Stepsizes normalized by 1/L, 0-indexed.

    ``entries`` is a read-only float array in double precision or an object
    array of mpf values when built with a high-precision backend.
    """

    kind: str
    k: int
    entries: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        self.entries.flags.writeable = False

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def as_floats(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def ref(self) -> dict:
        return {"kind": self.kind, "k": self.k}


def nu(m: int) -> int:
    """Exponent of 2 in the factorization of m >= 1 (trailing zero bits)."""
    if m < 1:
        raise ValueError(f"nu is defined for m >= 1, got {m}")
    return (m & -m).bit_length() - 1


def _check_level(k, ctx):
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise TypeError(f"level k must be an integer, got {k!r}")
    limit = k_max_for(ctx)
    if not 1 <= k <= limit:
        raise ValueError(f"level k must lie in [1, {limit}], got {k}")


def _array(values, ctx):
    if ctx is FLOAT:
        return np.asarray(values, dtype=float)
    out = np.empty(len(values), dtype=object)
    out[:] = list(values)
    return out


def _silver_entries(k, ctx):
    entries = _array([ctx.sqrt(ctx.mpf(2))], ctx)
    for j in range(1, k):
        entries = np.concatenate([entries, _array([beta(j, ctx)], ctx), entries])
    return entries


def _right_entries(k, ctx):
    entries = _array([ctx.mpf(3) / 2], ctx)
    for j in range(1, k):
        a = alpha(j, r_value(j, ctx), ctx)
        entries = np.concatenate([_silver_entries(j, ctx), _array([a], ctx), entries])
    return entries


def silver(k: int, ctx=FLOAT) -> StepSchedule:
    """pi^(k): pi^(1) = [sqrt 2], pi^(k+1) = [pi^(k), beta_k, pi^(k)]."""
    _check_level(k, ctx)
    return StepSchedule("silver", k, _silver_entries(k, ctx))


def silver_direct(k: int, ctx=FLOAT) -> np.ndarray:
    """pi^(k) from the closed form pi_i = beta_{nu(i+1)}."""
    _check_level(k, ctx)
    betas = [beta(j, ctx) for j in range(k)]
    return _array([betas[nu(i + 1)] for i in range(2**k - 1)], ctx)


def h_right(k: int, ctx=FLOAT) -> StepSchedule:
    """Right-heavy schedule: [3/2], then [pi^(k), alpha_k, h_right^(k)]."""
    _check_level(k, ctx)
    return StepSchedule("right", k, _right_entries(k, ctx))


def h_left(k: int, ctx=FLOAT) -> StepSchedule:
    """Left-heavy schedule, the reversal of :func:`h_right`."""
    _check_level(k, ctx)
    entries = _array([ctx.mpf(3) / 2], ctx)
    for j in range(1, k):
        a = alpha(j, r_value(j, ctx), ctx)
        entries = np.concatenate([entries, _array([a], ctx), _silver_entries(j, ctx)])
    return StepSchedule("left", k, entries)


def composite(k: int, ctx=FLOAT) -> StepSchedule:
    """[h_right^(k), h_left^(k)], 2^(k+1) - 2 steps."""
    _check_level(k, ctx)
    right = _right_entries(k, ctx)
    return StepSchedule("composite", k, np.concatenate([right, right[::-1]]))


_BUILDERS = {"silver": silver, "left": h_left, "right": h_right, "composite": composite}


def make_schedule(kind: str, k: int, ctx=FLOAT) -> StepSchedule:
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown schedule kind {kind!r}; choose from {KINDS}") from None
    return builder(k, ctx)


def _log_sum(values, ctx):
    if ctx is FLOAT:
        return float(np.sum(np.log(np.asarray(values, dtype=float))))
    return sum((ctx.log(v) for v in values), ctx.mpf(0))


def check_r_identities(s: StepSchedule, ctx=FLOAT, tol: float = R_IDENTITY_TOL) -> BoundReport:
    """Compare 1 + 2*sum(h) and prod(h - 1)**-2 against r_k.

    The product is formed as exp(-2 * sum(log(h - 1))) so it neither overflows
    nor underflows at large k.
    """
    if s.kind not in ("left", "right"):
        raise ValueError(f"r identities apply to left/right schedules, not {s.kind!r}")
    r_k = r_value(s.k, ctx)
    sum_side = 1 + 2 * s.entries.sum()
    prod_side = ctx.exp(-2 * _log_sum(s.entries - 1, ctx))
    sum_rep = equality_report("identity", r_k, sum_side, tol)
    prod_rep = equality_report("identity", r_k, prod_side, tol)
    worst = max(sum_rep, prod_rep, key=lambda rep: rep.rel_err_or_margin)
    return BoundReport(
        claim="identity",
        theoretical=r_k,
        measured=worst.measured,
        slack=worst.slack,
        rel_err_or_margin=worst.rel_err_or_margin,
        passed=sum_rep.passed and prod_rep.passed,
        name=f"r-identity {s.kind} k={s.k}",
        tolerance=tol,
        details={
            "r_k": r_k,
            "sum_side": sum_side,
            "product_side": prod_side,
            "sum_rel_err": sum_rep.rel_err_or_margin,
            "product_rel_err": prod_rep.rel_err_or_margin,
        },
    )


def check_silver_identities(k: int, ctx=FLOAT, tol: float = R_IDENTITY_TOL) -> BoundReport:
    """sum(pi^(k)) = rho**k - 1 and prod(pi_i - 1)**2 = rho**(-2k)."""
    s = silver(k, ctx)
    p = rho(ctx)
    total = s.entries.sum()
    log_prod = 2 * _log_sum(s.entries - 1, ctx)
    sum_rep = equality_report("identity", p**k - 1, total, tol)
    prod_rep = equality_report("identity", p ** (-2 * k), ctx.exp(log_prod), tol)
    worst = max(sum_rep, prod_rep, key=lambda rep: rep.rel_err_or_margin)
    return BoundReport(
        claim="identity",
        theoretical=worst.theoretical,
        measured=worst.measured,
        slack=worst.slack,
        rel_err_or_margin=worst.rel_err_or_margin,
        passed=sum_rep.passed and prod_rep.passed,
        name=f"silver-identity k={k}",
        tolerance=tol,
        details={
            "sum": total,
            "sum_expected": p**k - 1,
            "product": ctx.exp(log_prod),
            "product_expected": p ** (-2 * k),
            "sum_rel_err": sum_rep.rel_err_or_margin,
            "product_rel_err": prod_rep.rel_err_or_margin,
        },
    )
