"""Silver-ratio constants: beta_k, alpha_k, r_k and the asymptotic rate constant.

Every function takes an optional scalar backend ``ctx``. The default
:data:`FLOAT` evaluates in double precision; :func:`mp_backend` returns an
mpmath context for higher-precision work. Only ``sqrt``, ``log``, ``exp`` and
``mpf`` are used, so any object exposing those works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath


class _FloatBackend:
    name = "float"
    sqrt = staticmethod(math.sqrt)
    log = staticmethod(math.log)
    exp = staticmethod(math.exp)
    mpf = float

    def __repr__(self):
        return "FLOAT"


FLOAT = _FloatBackend()

# Certificates hold entries of size rho**(2k); past this level double precision
# loses every significant digit of the identity residuals.
K_MAX_FLOAT = 20
# Schedules are dense, so this is a memory cap rather than a precision one.
K_MAX_MP = 22


@lru_cache(maxsize=None)
def mp_backend(dps: int = 50):
    """Return an independent mpmath context working at ``dps`` decimal digits."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    ctx.name = f"mp{dps}"
    return ctx


def k_max_for(ctx=FLOAT) -> int:
    return K_MAX_FLOAT if ctx is FLOAT else K_MAX_MP


def _finite(value, what):
    if not math.isfinite(float(value)):
        raise ArithmeticError(f"{what} is not finite: {value!r}")
    return value


def rho(ctx=FLOAT):
    """The silver ratio 1 + sqrt(2), evaluated at the backend's precision."""
    return 1 + ctx.sqrt(ctx.mpf(2))


def beta(k: int, ctx=FLOAT):
    """beta_k = 1 + rho**(k-1), defined for k >= 0."""
    if k < 0:
        raise ValueError(f"beta_k needs k >= 0, got {k}")
    return _finite(1 + rho(ctx) ** (k - 1), "beta")


def alpha(k: int, r_k, ctx=FLOAT):
    """The root larger than one of ``r_k (x - 1 - rho**k) + 2 (x - 1)**2``."""
    if k < 1:
        raise ValueError(f"alpha_k needs k >= 1, got {k}")
    if not r_k > 0:
        raise ValueError(f"r_k must be positive, got {r_k}")
    r_k = ctx.mpf(r_k)
    rk = rho(ctx) ** k
    return _finite(1 + (ctx.sqrt(r_k * (r_k + 8 * rk)) - r_k) / 4, "alpha")


def r_next(k: int, r_k, ctx=FLOAT):
    """r_{k+1} from r_k via the explicit recurrence."""
    if not r_k > 0:
        raise ValueError(f"r_k must be positive, got {r_k}")
    r_k = ctx.mpf(r_k)
    rk = rho(ctx) ** k
    return _finite((r_k + 4 * rk + ctx.sqrt(r_k * (r_k + 8 * rk))) / 2, "r")


def r_value(k: int, ctx=FLOAT):
    """r_k for k >= 1, starting from r_1 = 4."""
    if k < 1:
        raise ValueError(f"r_k needs k >= 1, got {k}")
    return _r_prefix(k, ctx)[k - 1]


@lru_cache(maxsize=64)
def _r_prefix(k: int, ctx) -> tuple:
    rs = [ctx.mpf(4)]
    for j in range(1, k):
        rs.append(r_next(j, rs[-1], ctx))
    return tuple(rs)


def asymptotic_constant(ctx=FLOAT):
    """gamma* = (rho - 1)(1 + rho**-1/2), the limit of r_k / rho**k."""
    p = rho(ctx)
    return (p - 1) * (1 + 1 / ctx.sqrt(p))


def gamma_map(x, ctx=FLOAT):
    """One step of the normalized recurrence gamma_{k+1} = f(gamma_k)."""
    return (4 + x + ctx.sqrt(x * (x + 8))) / (2 * rho(ctx))


@dataclass(frozen=True)
class ConstantsTable:
    """Immutable snapshot of beta_0..beta_kmax and alpha, r, gamma for k = 1..kmax.

    ``alpha``, ``r`` and ``gamma`` are stored 0-based (position ``k - 1``);
    use the accessor methods to index by level.
    """

    k_max: int
    beta: tuple
    alpha: tuple
    r: tuple
    gamma: tuple

    def beta_k(self, k: int):
        return self.beta[k]

    def alpha_k(self, k: int):
        return self.alpha[k - 1]

    def r_k(self, k: int):
        return self.r[k - 1]

    def gamma_k(self, k: int):
        return self.gamma[k - 1]

    def rows(self):
        """(k, beta_k, alpha_k, r_k, gamma_k) for k = 1..k_max."""
        return [
            (k, self.beta[k], self.alpha[k - 1], self.r[k - 1], self.gamma[k - 1])
            for k in range(1, self.k_max + 1)
        ]


@lru_cache(maxsize=16)
def constants_table(k_max: int = K_MAX_FLOAT, ctx=FLOAT) -> ConstantsTable:
    if k_max < 1:
        raise ValueError(f"k_max must be positive, got {k_max}")
    p = rho(ctx)
    rs = _r_prefix(k_max, ctx)
    return ConstantsTable(
        k_max=k_max,
        beta=tuple(beta(k, ctx) for k in range(k_max + 1)),
        alpha=tuple(alpha(k, rs[k - 1], ctx) for k in range(1, k_max + 1)),
        r=rs,
        gamma=tuple(rs[k - 1] / p**k for k in range(1, k_max + 1)),
    )
