"""Command-line front end.

Subcommands:

  capacity   single-point capacity from (s, a_bar, d) or raw (q, x) values
  sweep      grid sweep over (s, a_bar, d), CSV output
  compare    cross-check the three entropy methods on one point
  figure     canned sweeps reproducing the standard result curves

Exit codes: 0 success, 1 invalid parameters, 2 non-convergence,
3 atom budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import blackwell as bw
from .channel import ParameterError, from_physical, from_raw
from .sweep import (
    PRESETS,
    AxisSpec,
    SolverKnobs,
    SweepSpec,
    compare_methods,
    run_sweep,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_CONVERGENCE = 2
EXIT_BUDGET = 3


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver knobs")
    group.add_argument("--tol", type=float, default=bw.TOL,
                       help="convergence tolerance on the entropy functional")
    group.add_argument("--max-iter", type=int, default=bw.MAX_ITER,
                       help="maximum transfer-operator iterations")
    group.add_argument("--merge-tol", type=float, default=bw.MERGE_TOL,
                       help="atom merge tolerance in position")
    group.add_argument("--prune-tol", type=float, default=bw.PRUNE_TOL,
                       help="atom prune threshold in weight")
    group.add_argument("--atom-budget", type=int, default=bw.ATOM_BUDGET,
                       help="maximum number of measure atoms")
    group.add_argument("--oracle-n", type=int, default=16,
                       help="blocklength for the exact oracle")
    group.add_argument("--mc-steps", type=int, default=10**6,
                       help="Monte-Carlo steps")
    group.add_argument("--seed", type=int, default=12345,
                       help="Monte-Carlo seed")
    group.add_argument("--cross-tol", type=float, default=1e-4,
                       help="blackwell vs oracle agreement tolerance")


def _add_point_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group(
        "channel point", "either the physical view or the raw view"
    )
    group.add_argument("--s", type=float, help="switching eigenvalue in (-1, 1)")
    group.add_argument("--a", type=float, help="average no-error probability")
    group.add_argument("--d", type=float, help="half-difference of no-error probabilities")
    group.add_argument("--q00", type=float, help="P(stay on sub-channel 0)")
    group.add_argument("--q10", type=float, help="P(switch from 1 to 0)")
    group.add_argument("--x0", type=float, help="no-error probability of sub-channel 0")
    group.add_argument("--x1", type=float, help="no-error probability of sub-channel 1")


def _knobs(args: argparse.Namespace) -> SolverKnobs:
    return SolverKnobs(
        tol=args.tol, max_iter=args.max_iter,
        merge_tol=args.merge_tol, prune_tol=args.prune_tol,
        atom_budget=args.atom_budget, oracle_n=args.oracle_n,
        mc_steps=args.mc_steps, seed=args.seed, cross_tol=args.cross_tol,
    )


def _point(args: argparse.Namespace):
    physical = (args.s, args.a, args.d)
    raw = (args.q00, args.q10, args.x0, args.x1)
    if all(v is not None for v in physical):
        return from_physical(args.s, args.a, args.d)
    if all(v is not None for v in raw):
        q = ((args.q00, 1.0 - args.q00), (args.q10, 1.0 - args.q10))
        return from_raw(q, args.x0, args.x1)
    raise ParameterError(
        "specify a channel point with --s --a --d, or with --q00 --q10 --x0 --x1"
    )


def _parse_range(text: str) -> AxisSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(
            f"ranges are written start:stop:count, got {text!r}"
        )
    return AxisSpec(float(parts[0]), float(parts[1]), int(parts[2]))


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _cmd_capacity(args: argparse.Namespace) -> int:
    # params built here never carry relax_cp, so 1 - entropy is the capacity
    params = _point(args)
    knobs = _knobs(args)
    est = bw.entropy_rate_blackwell(
        params,
        tol=knobs.tol, max_iter=knobs.max_iter,
        merge_tol=knobs.merge_tol, prune_tol=knobs.prune_tol,
        atom_budget=knobs.atom_budget,
    )
    value = 1.0 - est.value
    if -1e-12 < value < 0.0:
        value = 0.0
    print(f"capacity = {value:.12g} bits/use")
    print(
        f"entropy rate = {est.value:.12g} bits/use "
        f"(blackwell, {est.meta} iterations, last step {est.delta:.3g})"
    )
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.d_max:
        d_axis, d_policy = None, "max_allowed"
    elif args.d_range is not None:
        d_axis, d_policy = _parse_range(args.d_range), "explicit"
    else:
        raise ParameterError("specify --d-range START:STOP:COUNT or --d-max")
    spec = SweepSpec(
        s_axis=_parse_range(args.s_range),
        a_axis=_parse_range(args.a_range),
        d_axis=d_axis,
        d_policy=d_policy,
        methods=tuple(args.methods.split(",")),
        knobs=_knobs(args),
    )
    stream, close = _open_out(args.out)
    try:
        run_sweep(spec, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    report = compare_methods(_point(args), _knobs(args))
    print(report.summary())
    return EXIT_OK


def _cmd_figure(args: argparse.Namespace) -> int:
    spec = PRESETS[args.which]()
    stream, close = _open_out(args.out)
    try:
        run_sweep(spec, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memcap",
        description=(
            "Classical capacity of a qubit depolarizing channel whose noise "
            "is driven by a two-state Markov switching process."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cap = sub.add_parser("capacity", help="single-point capacity")
    _add_point_flags(p_cap)
    _add_solver_flags(p_cap)
    p_cap.set_defaults(func=_cmd_capacity)

    p_sweep = sub.add_parser("sweep", help="grid sweep, CSV output")
    p_sweep.add_argument("--s-range", required=True, metavar="START:STOP:COUNT")
    p_sweep.add_argument("--a-range", required=True, metavar="START:STOP:COUNT")
    p_sweep.add_argument("--d-range", metavar="START:STOP:COUNT")
    p_sweep.add_argument("--d-max", action="store_true",
                         help="set d to min(a_bar - 1/3, 1 - a_bar)")
    p_sweep.add_argument("--methods", default="blackwell",
                         help="comma list of blackwell,oracle_n,monte_carlo,references")
    p_sweep.add_argument("--out", default="-", help="output path ('-' = stdout)")
    _add_solver_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="cross-check the entropy methods")
    _add_point_flags(p_cmp)
    _add_solver_flags(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_fig = sub.add_parser("figure", help="canned result-curve sweeps")
    p_fig.add_argument("which", choices=sorted(PRESETS))
    p_fig.add_argument("--out", default="-", help="output path ('-' = stdout)")
    p_fig.set_defaults(func=_cmd_figure)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except bw.ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except bw.AtomBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
