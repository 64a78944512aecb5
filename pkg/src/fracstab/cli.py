"""Command-line entry point.

Exit codes: 0 success (for ``check``: criterion satisfied; for ``verify``: no
sample exceeded epsilon), 1 criterion not satisfied or a violation observed,
2 usage, parse or validation error, 3 numerical failure.

The default Mittag-Leffler tolerance of every subcommand can be overridden
through the ``FRACSTAB_TOL`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from fracstab import gronwall, io, stability
from fracstab.errors import FracStabError, NumericalError, ValidationError
from fracstab.mittag_leffler import DEFAULT_TOL, ml_eval
from fracstab.solver import solve_fdde

TOL_ENV = "FRACSTAB_TOL"

EXIT_OK = 0
EXIT_UNSATISFIED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ValidationError(f"{TOL_ENV}={raw!r} is not a number", field=TOL_ENV) from None
    if not tol > 0.0:
        raise ValidationError(f"{TOL_ENV} must be positive, got {raw!r}", field=TOL_ENV)
    return tol


def _out_stream(path: str | None):
    return sys.stdout if path in (None, "-") else path


# {{{ subcommands


def cmd_ml(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    res = ml_eval(args.q, args.z, tol)
    print(f"value = {io.fmt_scalar(res.value)}")
    print(f"error_estimate = {res.error_estimate:.3e}")
    print(f"terms_used = {res.terms_used}")
    print(f"regime = {res.regime}")
    return EXIT_OK


def cmd_gronwall(args) -> int:
    grid = gronwall.uniform_grid(args.horizon, args.steps)
    a = io.parse_profile_preset(args.a, grid, "a")
    g = io.parse_profile_preset(args.g, grid, "g")
    inp = gronwall.BoundInputs(args.q, grid, a, g)
    oracle = gronwall.picard_oracle(inp, a, args.iterations)
    series = gronwall.gronwall_series_bound(inp, args.terms).series_form
    ml = gronwall.gronwall_ml_bound(inp, default_tol()).ml_form
    rows = (
        [io.fmt_state(v) for v in vals] for vals in zip(grid, oracle, series, ml)
    )
    io.emit_csv(["t", "oracle", "series_bound", "ml_form"], rows, _out_stream(args.out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    system = io.load_system(args.system)
    hist = io.parse_history_preset(args.history)
    inp = io.parse_input_preset(args.input)
    traj = solve_fdde(system, hist, inp, args.horizon, args.steps, corrector_sweeps=args.sweeps)
    header = ["t", *(f"x_{i + 1}" for i in range(system.n)), "max_norm"]
    rows = (
        [io.fmt_state(t), *(io.fmt_state(v) for v in x), io.fmt_state(nrm)]
        for t, x, nrm in zip(traj.grid, traj.states, traj.max_norms)
    )
    io.emit_csv(header, rows, _out_stream(args.out))
    return EXIT_OK


def _params(args) -> stability.StabilityParams:
    return stability.StabilityParams(
        delta=args.delta, epsilon=args.epsilon, q_u=args.qu, T=args.horizon
    )


def cmd_check(args) -> int:
    system = io.load_system(args.system)
    params = _params(args)
    report = stability.evaluate(system, params, args.variant)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        c = report.constants
        label = system.name or args.system
        print(f"system      {label}")
        print(f"variant     {report.variant.value}")
        print(f"constants   sigma={io.fmt_scalar(c.sigma)} b0={io.fmt_scalar(c.b0)} "
              f"L={io.fmt_scalar(c.L)} m={io.fmt_scalar(c.m)} p={c.p} q={io.fmt_scalar(c.q)}")
        print(f"lhs         {io.fmt_scalar(report.lhs)}")
        print(f"rhs         {io.fmt_scalar(report.rhs)}")
        print(f"margin      {io.fmt_scalar(report.margin)}")
        print(f"satisfied   {'yes' if report.satisfied else 'no'}")
    return EXIT_OK if report.satisfied else EXIT_UNSATISFIED


def cmd_verify(args) -> int:
    system = io.load_system(args.system)
    params = _params(args)
    report = stability.verify_by_simulation(
        system, params, samples=args.samples, steps=args.steps, seed=args.seed
    )
    header = [
        "sample", "history_kind", "history_sup", "input_sup", "sup_norm",
        "below_epsilon", "envelope_ratio", "error",
    ]
    rows = [
        [
            s.index, s.history_kind, io.fmt_scalar(s.history_sup), io.fmt_scalar(s.input_sup),
            io.fmt_scalar(s.sup_norm), int(s.below_epsilon), io.fmt_scalar(s.envelope_ratio),
            s.error or "",
        ]
        for s in report.samples
    ]
    if args.out:
        io.emit_csv(header, rows, args.out)
    crit = report.criterion
    print(f"criterion   lhs={io.fmt_scalar(crit.lhs)} rhs={io.fmt_scalar(crit.rhs)} "
          f"satisfied={'yes' if crit.satisfied else 'no'}", file=sys.stderr)
    print(f"samples     {len(report.samples)} ({report.errors} failed)", file=sys.stderr)
    print(f"max sup     {io.fmt_scalar(report.max_sup_norm)} (epsilon {io.fmt_scalar(params.epsilon)})",
          file=sys.stderr)
    print(f"violations  {report.violations}; above envelope {report.envelope_violations}",
          file=sys.stderr)
    return EXIT_OK if report.violations == 0 else EXIT_UNSATISFIED


def cmd_sweep(args) -> int:
    system = io.load_system(args.system)
    params = _params(args)
    values = np.linspace(args.start, args.stop, args.points)
    reports = stability.sweep(system, params, args.param, values, args.variant)
    rows = (
        [io.fmt_scalar(v), io.fmt_scalar(r.lhs), int(r.satisfied)]
        for v, r in zip(values, reports)
    )
    io.emit_csv([args.param, "lhs", "satisfied"], rows, _out_stream(args.out))
    return EXIT_OK


# }}}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracstab",
        description="Finite-time stability of fractional-order multi-delay systems.",
        epilog=f"Set {TOL_ENV} to override the default Mittag-Leffler tolerance "
        f"({DEFAULT_TOL:g}).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ml", help="evaluate the Mittag-Leffler function E_q(z)")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("gronwall", help="tabulate Gronwall bounds against the Picard oracle")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--a", default="constant:1", help="constant:c or poly:c0,c1,...")
    p.add_argument("--g", default="constant:1", help="constant:c or poly:c0,c1,...")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--steps", type=_positive_int, default=gronwall.DEFAULT_STEPS)
    p.add_argument("--iterations", type=_positive_int, default=40)
    p.add_argument("--terms", type=_positive_int, default=gronwall.DEFAULT_SERIES_TERMS)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_gronwall)

    p = sub.add_parser("simulate", help="integrate a system and write its trajectory")
    p.add_argument("--system", required=True)
    p.add_argument("--history", default="constant:1",
                   help="constant:v[,..], poly:c0,c1,.. or sin:amp,freq[,phase]")
    p.add_argument("--input", default="zero", help="zero, constant:v[,..] or sin:amp,freq")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--steps", type=_positive_int, default=1024)
    p.add_argument("--sweeps", type=_positive_int, default=1, help="corrector sweeps per step")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    variants = [v.value for v in stability.Variant]
    for name, func, helptext in (
        ("check", cmd_check, "evaluate a finite-time stability criterion"),
        ("verify", cmd_verify, "cross-check the criterion by random simulation"),
        ("sweep", cmd_sweep, "evaluate the criterion over a parameter range"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--system", required=True)
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--epsilon", type=float, required=True)
        p.add_argument("--qu", type=float, default=0.0)
        p.add_argument("--horizon", type=float, required=True)
        p.set_defaults(func=func)
        if name == "check":
            p.add_argument("--variant", choices=variants, default="theorem31")
            p.add_argument("--json", action="store_true", help="print the report as JSON")
        elif name == "verify":
            p.add_argument("--samples", type=_positive_int, default=100)
            p.add_argument("--steps", type=_positive_int, default=512)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--out", default=None, help="per-sample CSV report")
        else:
            p.add_argument("--param", choices=stability.SWEEP_PARAMS, required=True)
            p.add_argument("--from", dest="start", type=float, required=True)
            p.add_argument("--to", dest="stop", type=float, required=True)
            p.add_argument("--points", type=_positive_int, default=21)
            p.add_argument("--variant", choices=variants, default="theorem31")
            p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"fracstab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FracStabError as exc:
        print(f"fracstab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
