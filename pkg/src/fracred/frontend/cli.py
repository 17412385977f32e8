"""Command-line driver: ``fracred {reduce,solve,stability,ml,verify}``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from ..errors import FracredError
from ..orders import parse_order
from ..powcalc import check_semigroup
from ..reduce import (MultiTermProblem, ReductionReport, SingleTermSystem, normalize_orders,
                      reduce_multiorder_to_single, reduce_to_multi_order, reduce_to_single_term)
from ..solve import solve_multi_order
from ..specfun import mittag_leffler
from ..stability import MAX_DIMENSION, _render_poly, assess_stability, characteristic_polynomial
from .expr import parse_power_sum
from .problem import read_problem


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _order_arg(text: str):
    try:
        return parse_order(text)
    except FracredError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _reduce(pf, route: str):
    """Reduction report for a loaded problem file, plus the reduced system."""
    model = pf.model
    if isinstance(model, MultiTermProblem):
        if route == "multi_order":
            q = normalize_orders(model)
            s = reduce_to_multi_order(q)
            return ReductionReport("multi_order", q.orders, s), s
        s = reduce_to_single_term(model)
        return ReductionReport("single_term", model.orders, s, s.gamma, s.gamma.denominator), s
    if isinstance(model, SingleTermSystem):
        return ReductionReport("single_term (given)", model.orders, model, model.gamma), model
    s = reduce_multiorder_to_single(model)
    return ReductionReport("multi_order_to_single", model.orders, s, s.gamma), s


def cmd_reduce(args) -> int:
    pf = read_problem(args.file)
    report, system = _reduce(pf, args.to)
    if args.json:
        d = report.to_dict()
        if system.matrix is not None and system.dimension <= MAX_DIMENSION:
            d["characteristic_polynomial"] = characteristic_polynomial(system.matrix).tolist()
        print(json.dumps(d, indent=2))
        return 0
    print(report.render())
    if system.matrix is not None and system.dimension <= MAX_DIMENSION:
        print("characteristic polynomial: " + _render_poly(characteristic_polynomial(system.matrix)))
    return 0


def cmd_solve(args) -> int:
    pf = read_problem(args.file)
    h = args.h if args.h is not None else pf.h
    if h is None:
        raise FracredError("no step size: pass --h or set solver.h in the problem file")
    t_end = args.t_end if args.t_end is not None else (pf.t_end if pf.t_end is not None else pf.b)
    report, system = _reduce(pf, args.via)
    traj = solve_multi_order(system, h, t_end, corrector_iterations=pf.corrector_iterations,
                             provenance=f"{report.kind} from {args.file}")
    text = traj.to_csv(args.csv)
    if args.csv is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {traj.values.shape[0]} rows x {traj.values.shape[1]} components to {args.csv}")
    return 0


def cmd_stability(args) -> int:
    pf = read_problem(args.file)
    model = pf.model
    if isinstance(model, MultiTermProblem):
        model = reduce_to_single_term(model)
    report = assess_stability(model)
    print(json.dumps(report.key_values(), indent=2) if args.json else report.render())
    return 0


def cmd_ml(args) -> int:
    for z in args.z:
        print(f"{mittag_leffler(args.alpha, args.beta, z):.{args.digits}g}")
    return 0


def cmd_verify(args) -> int:
    f = parse_power_sum(args.f, args.a)
    report = check_semigroup(f, args.beta, args.gamma, args.mode, args.alpha)
    print(report.render())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fracred", description="Fractional calculus reductions, solvers and checks.")
    p.add_argument("--seed", help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("reduce", help="print the reduction report of a problem file")
    r.add_argument("file")
    r.add_argument("--to", choices=["single_term", "multi_order"], default="single_term",
                   help="target form for multi-term problems (default: single_term)")
    r.add_argument("--json", action="store_true", help="structured output")
    r.set_defaults(run=cmd_reduce)

    s = sub.add_parser("solve", help="integrate a problem file and write a trajectory CSV")
    s.add_argument("file")
    s.add_argument("--h", type=float, help="step size (overrides solver.h)")
    s.add_argument("--t-end", type=float, dest="t_end", help="end time (overrides solver.t_end)")
    s.add_argument("--csv", help="output path (default: stdout)")
    s.add_argument("--via", choices=["single_term", "multi_order"], default="single_term",
                   help="reduction route for multi-term problems")
    s.set_defaults(run=cmd_solve)

    st = sub.add_parser("stability", help="sector stability test of a linear problem file")
    st.add_argument("file")
    st.add_argument("--json", action="store_true")
    st.set_defaults(run=cmd_stability)

    m = sub.add_parser("ml", help="evaluate E_{alpha,beta}(z)")
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--beta", type=float, default=1.0)
    m.add_argument("--z", type=float, nargs="+", required=True)
    m.add_argument("--digits", type=int, default=17, choices=range(1, 18), metavar="{1..17}")
    m.set_defaults(run=cmd_ml)

    v = sub.add_parser("verify", help="check the composition law D^gamma D^beta = D^(beta+gamma) on a power sum")
    v.add_argument("--mode", choices=["rl", "caputo", "split"], default="caputo")
    v.add_argument("--f", required=True, help='power sum in t, e.g. "(t)^0.5" or "3 + 2*(t-1)^1.5"')
    v.add_argument("--beta", type=_order_arg, required=True)
    v.add_argument("--gamma", type=_order_arg, required=True)
    v.add_argument("--alpha", type=_order_arg, help="regularity order of f (default beta+gamma)")
    v.add_argument("--a", type=float, default=0.0, help="base point of the power sum")
    v.set_defaults(run=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        parser.error("--seed is reserved: every computation is deterministic")
    try:
        return args.run(args)
    except FracredError as exc:
        print(f"fracred {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fracred {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
