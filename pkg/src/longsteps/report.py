"""Uniform pass/fail record shared by identity, bound and table checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

CLAIMS = ("thm1", "thm2", "thm3", "identity", "table1", "restart")


@dataclass(frozen=True)
class BoundReport:
    """Outcome of comparing a theoretical value with a measured one.

    For inequalities ``passed`` means ``slack >= -tolerance``; for identities and
    equalities it means ``rel_err_or_margin <= tolerance`` where the relative
    error is already scaled by the largest compared magnitude.
    """

    claim: str
    theoretical: float
    measured: float
    slack: float
    rel_err_or_margin: float
    passed: bool
    name: str = ""
    tolerance: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim {self.claim!r}")

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        label = self.name or self.claim
        return (
            f"{verdict} {label}: theoretical={float(self.theoretical)!r} "
            f"measured={float(self.measured)!r} err={float(self.rel_err_or_margin):.3e}"
        )


def relative_error(lhs, rhs, scale=0.0) -> float:
    """|lhs - rhs| / max(|lhs|, |rhs|, scale), or 0 if everything is zero."""
    denom = max(abs(lhs), abs(rhs), abs(scale))
    if denom == 0:
        return 0.0
    return float(abs(lhs - rhs) / denom)


def equality_report(claim, expected, measured, tol, scale=0.0, name="", **details) -> BoundReport:
    err = relative_error(measured, expected, scale)
    return BoundReport(
        claim=claim,
        theoretical=expected,
        measured=measured,
        slack=expected - measured,
        rel_err_or_margin=err,
        passed=err <= tol,
        name=name,
        tolerance=tol,
        details=details,
    )


def inequality_report(claim, bound, measured, tol, name="", **details) -> BoundReport:
    """Check ``measured <= bound`` up to an absolute ``tol``."""
    slack = bound - measured
    return BoundReport(
        claim=claim,
        theoretical=bound,
        measured=measured,
        slack=slack,
        rel_err_or_margin=slack,
        passed=slack >= -tol,
        name=name,
        tolerance=tol,
        details=details,
    )
