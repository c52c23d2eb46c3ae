"""Command line interface.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from longsteps import bounds
from longsteps.certificates import CHECKS, DENSE_K_MAX
from longsteps.constants import FLOAT, K_MAX_FLOAT, constants_table, k_max_for, mp_backend
from longsteps.functions import Huber, Quadratic
from longsteps.schedules import KINDS, check_r_identities, make_schedule
from longsteps.trajectory import gd_rollout, random_free_trajectory, trajectory_to_dict

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 20240101


class UsageError(Exception):
    pass


def num(v) -> str:
    """Shortest decimal string that reads back to the same value."""
    if isinstance(v, (float, int, np.floating, np.integer)):
        return repr(float(v))
    # mpmath values: print every digit the context carries
    return str(v)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _ctx(args):
    return FLOAT if getattr(args, "dps", None) is None else mp_backend(args.dps)


def _level(k, ctx=FLOAT, upper=None):
    upper = k_max_for(ctx) if upper is None else upper
    if not 1 <= k <= upper:
        raise UsageError(f"--k must lie in [1, {upper}], got {k}")
    return k


# -- commands -------------------------------------------------------------------


def cmd_constants(args):
    ctx = _ctx(args)
    table = constants_table(_level(args.k, ctx), ctx)
    header = ["k", "beta_k", "alpha_k", "r_k", "gamma_k"]
    rows = [[str(k)] + [num(v) for v in vals] for k, *vals in table.rows()]
    if args.format == "json":
        return _json([dict(zip(header, row)) for row in rows]), True
    if args.format == "csv":
        return _csv(rows, header), True
    lines = [f"{'k':>3} {'beta_k':>24} {'alpha_k':>24} {'r_k':>24} {'gamma_k':>24}"]
    lines += [f"{r[0]:>3} " + " ".join(f"{v:>24}" for v in r[1:]) for r in rows]
    return "\n".join(lines) + "\n", True


def cmd_schedule(args):
    ctx = _ctx(args)
    s = make_schedule(args.kind, _level(args.k, ctx), ctx)
    report = check_r_identities(s, ctx, 1e-9 if args.tol is None else args.tol) if s.kind in ("left", "right") else None
    entries = [num(v) for v in s.entries]
    ok = report is None or report.passed
    if args.format == "json":
        obj = {"kind": s.kind, "k": s.k, "entries": entries}
        if report is not None:
            obj["r_identity"] = {
                "r_k": num(report.details["r_k"]),
                "sum_side": num(report.details["sum_side"]),
                "product_side": num(report.details["product_side"]),
                "rel_err": num(report.rel_err_or_margin),
                "pass": report.passed,
            }
        return _json(obj), ok
    if args.format == "csv":
        return _csv(list(enumerate(entries)), ["index", "h"]), ok
    lines = [f"{s.kind} schedule, k={s.k}, {len(s)} steps"]
    lines += [f"{i:>6} {e}" for i, e in enumerate(entries)]
    if report is not None:
        d = report.details
        lines.append(
            f"r_k={num(d['r_k'])} 1+2*sum={num(d['sum_side'])} prod^-2={num(d['product_side'])} "
            f"{'PASS' if report.passed else 'FAIL'}"
        )
    return "\n".join(lines) + "\n", ok


def parse_fn(spec: str, L: float):
    """``quadratic:d1,d2,...`` or ``huber:eta``."""
    name, _, params = spec.partition(":")
    try:
        values = [float(v) for v in params.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad numbers in function spec {spec!r}") from None
    try:
        if name == "quadratic":
            return Quadratic(values or [L], L)
        if name == "huber":
            if len(values) != 1:
                raise UsageError("huber takes exactly one breakpoint, e.g. huber:0.25")
            return Huber(values[0], L)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown function {name!r}; use quadratic:... or huber:eta")


def cmd_run(args):
    fn = parse_fn(args.fn, args.L)
    s = make_schedule(args.kind, _level(args.k))
    try:
        x0 = [float(v) for v in args.x0.split(",")]
    except ValueError:
        raise UsageError(f"bad --x0 {args.x0!r}") from None
    try:
        traj = gd_rollout(fn, x0, s)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        return _json(trajectory_to_dict(traj)), True
    if args.format == "csv":
        d = traj.dim
        header = ["i"] + [f"x{j}" for j in range(d)] + ["f"] + [f"g{j}" for j in range(d)]
        rows = [
            [i] + [num(v) for v in traj.x[i]] + [num(traj.f[i])] + [num(v) for v in traj.g[i]]
            for i in range(len(traj.x))
        ]
        return _csv(rows, header), True
    gN = traj.g[-1]
    lines = [
        f"{fn!r}, {s.kind} k={s.k}, N={len(s)}",
        f"f(x_0) - f_* = {num(traj.f[0] - fn.min_value)}",
        f"f(x_N) - f_* = {num(traj.f[-1] - fn.min_value)}",
        f"|grad f(x_N)| = {num(np.linalg.norm(gN))}",
    ]
    return "\n".join(lines) + "\n", True


def verify_rows(k_max: int, seeds: int, seed: int, dims, tol=None):
    rows = []
    for label, (check, kind) in sorted(CHECKS.items()):
        for k in range(1, k_max + 1):
            s = make_schedule(kind, k)
            for d in sorted(dims):
                for sd in range(seed, seed + seeds):
                    t = random_free_trajectory(s, d, sd)
                    rep = check(k, t, tol=tol)
                    rows.append((label, k, d, sd, rep))
    return rows


def cmd_verify(args):
    if args.seeds < 0:
        raise UsageError("--seeds must be nonnegative")
    if any(d < 1 for d in args.dim):
        raise UsageError("--dim must be positive")
    rows = verify_rows(_level(args.k, upper=14), args.seeds, args.seed, args.dim, args.tol)
    ok = all(rep.passed for *_, rep in rows)
    header = ["label", "k", "d", "seed", "lhs", "rhs", "rel_err", "pass"]
    table = [
        [label, k, d, sd, num(rep.measured), num(rep.theoretical),
         f"{rep.rel_err_or_margin:.3e}", str(rep.passed).lower()]
        for label, k, d, sd, rep in rows
    ]
    if args.format == "csv":
        return _csv(table, header), ok
    if args.format == "json":
        return _json([dict(zip(header, r)) for r in table]), ok
    lines = [f"{len(rows)} identity checks (dense for k <= {DENSE_K_MAX}, streamed above)"]
    worst = {}
    for label, k, d, sd, rep in rows:
        key = (label, k)
        worst[key] = max(worst.get(key, 0.0), rep.rel_err_or_margin)
    for (label, k), err in sorted(worst.items()):
        passed = all(rep.passed for lb, kk, *_, rep in rows if lb == label and kk == k)
        lines.append(f"{'PASS' if passed else 'FAIL'} {label} k={k:<2} max rel err {err:.3e}")
    lines.append("all passed" if ok else "FAILURES present")
    return "\n".join(lines) + "\n", ok


def cmd_tightness(args):
    reports = bounds.tightness(
        _level(args.k, upper=K_MAX_FLOAT), x0=args.x0, tol=bounds.TIGHTNESS_TOL if args.tol is None else args.tol
    )
    return _reports_out(reports, args.format)


def _reports_out(reports, fmt):
    ok = all(r.passed for r in reports)
    header = ["name", "claim", "theoretical", "measured", "slack", "rel_err_or_margin", "pass"]
    table = [
        [r.name, r.claim, num(r.theoretical), num(r.measured), num(r.slack), num(r.rel_err_or_margin), str(r.passed).lower()]
        for r in reports
    ]
    if fmt == "csv":
        return _csv(table, header), ok
    if fmt == "json":
        return _json([dict(zip(header, row)) for row in table]), ok
    return "\n".join(r.line() for r in reports) + "\n", ok


def cmd_table1(args):
    rows = bounds.table1()
    header = ["N", "ours", "silver_ref", "bnb_ref"]
    table = [[r.N, num(bounds.round_sig(r.ours)), num(r.silver_ref), num(r.bnb_ref)] for r in rows]
    if args.format == "csv":
        return _csv(table, header), True
    if args.format == "json":
        return _json([dict(zip(header, row)) for row in table]), True
    lines = [f"{'N':>4} {'ours':>10} {'silver':>10} {'b&b':>10}"]
    lines += [f"{r[0]:>4} {r[1]:>10} {r[2]:>10} {r[3]:>10}" for r in table]
    return "\n".join(lines) + "\n", True


def cmd_restart(args):
    if not 0 < args.mu <= 1:
        raise UsageError("--mu must lie in (0, 1]")
    if args.sweeps < 0:
        raise UsageError("--sweeps must be nonnegative")
    k = _level(args.k)
    if args.dim < 1:
        raise UsageError("--dim must be positive")
    fn = bounds.restart_quadratic(args.dim, args.mu, args.seed)
    x0 = np.random.default_rng(args.seed).standard_normal(fn.dim)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        gaps = bounds.restart_run(fn, k, args.sweeps, args.mu, x0)
    reports = bounds.check_restart(gaps, k, args.mu)
    ok = all(r.passed for r in reports)
    if args.format == "csv":
        rows = [[0, num(gaps[0]), "", ""]] + [
            [t + 1, num(gaps[t + 1]), num(gaps[t + 1] / gaps[t]), str(r.passed).lower()]
            for t, r in enumerate(reports)
        ]
        return _csv(rows, ["sweep", "gap", "ratio", "pass"]), ok
    if args.format == "json":
        return _json({"k": k, "mu": args.mu, "gaps": [num(g) for g in gaps], "pass": ok}), ok
    lines = [str(w.message) for w in caught]
    lines.append(f"restart with h_left^({k}), mu={args.mu}, {fn.dim}-d quadratic")
    lines += [f"sweep {t:>3} gap {num(g)}" for t, g in enumerate(gaps)]
    lines.append("contraction holds every sweep" if ok else "contraction FAILED")
    return "\n".join(lines) + "\n", ok


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longsteps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")

    p = sub.add_parser("constants", parents=[common], help="beta, alpha, r, gamma for k = 1..K")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--dps", type=int, default=None, help="decimal digits for high-precision mode")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("schedule", parents=[common], help="print a stepsize schedule")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dps", type=int, default=None)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("run", parents=[common], help="gradient descent with a schedule")
    p.add_argument("--fn", required=True, help="quadratic:d1,d2,... or huber:eta")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x0", required=True, help="comma separated start point")
    p.add_argument("--L", type=float, default=1.0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify-certs", parents=[common], help="randomized certificate identity checks")
    p.add_argument("--k", type=int, default=8, help="check levels 1..K")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--dim", type=int, nargs="+", default=[4])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tightness", parents=[common], help="equality checks on the worst-case functions")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x0", type=float, default=1.0)
    p.set_defaults(func=cmd_tightness)

    p = sub.add_parser("table1", parents=[common], help="worst-case objective gaps for N = 1..31")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("restart", parents=[common], help="repeated h_left sweeps on a conditioned quadratic")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_restart)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text, ok = args.func(args)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
