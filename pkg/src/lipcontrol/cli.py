"""Command-line interface.

Exit codes: 0 on success, 1 on verification failure, 2 on input errors.
Every randomized subcommand takes --seed and is reproducible from it;
identical inputs and seed give byte-identical output files.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import controller1d, controllermd, feasibility, fixedpoint, harness, sequences
from .errors import CrossingNotFoundError, LipcontrolError


def _write(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text().splitlines()


def _cmd_gen(args) -> int:
    if args.kind == "lattice":
        seq = sequences.gen_lattice(args.m, int(args.R))
    elif args.kind == "pow2":
        seq = sequences.gen_pow2(args.d, args.K, cap=args.cap)
    elif args.kind == "powergrid":
        seq = sequences.gen_power_grid(args.m, Fraction(args.c), Fraction(args.R), cap=args.cap)
    elif args.kind == "remarkA":
        power = args.growth_power
        seq = sequences.gen_remark_A(
            args.m, args.d, lambda x: x ** power, args.levels, cap=args.cap
        )
    else:
        raise ValueError(f"unknown kind {args.kind}")
    _write(args.out, sequences.seq_to_lines(seq))
    return 0


def _cmd_density(args) -> int:
    seq = sequences.seq_from_lines(_read_lines(args.infile))
    report = sequences.counting_function(seq, args.d, args.nmax)
    lines = [
        "# schema=density-report-v1",
        f"d={report.d} nmax={report.n_max} horizon={report.horizon} approx={int(report.approx)}",
        "n,count,ratio,sup_ratio",
    ]
    for n, (c, r, s) in enumerate(
        zip(report.counts, report.ratios, report.sup_ratios), start=1
    ):
        lines.append(f"{n},{c},{r},{s}")
    _write(args.out, lines)
    return 0


def _cmd_control(args) -> int:
    seq = sequences.seq_from_lines(_read_lines(args.infile))
    if args.mode == "1d":
        pairs = controller1d.build_schedule(seq, args.d, args.J)
        _write(args.out, feasibility.pairs_to_lines(pairs, 1, args.d))
        return 0
    assignment = controllermd.build_md(seq, args.j, args.d)
    pairs = assignment.pairs()
    _write(args.out, feasibility.pairs_to_lines(pairs, seq.m, args.d))
    if args.assignment:
        _write(args.assignment, controllermd.assignment_to_lines(assignment))
    return 0


def _cmd_evade(args) -> int:
    pairs, _m, d = feasibility.pairs_from_lines(_read_lines(args.infile))
    if args.d is not None:
        d = args.d
    trace = feasibility.evader_trace(pairs, d)
    if args.trace:
        _write(args.trace, feasibility.trace_to_lines(trace))
    report = feasibility.check_claim21(trace)
    if trace.any_empty() or not report.ok:
        print("evasion failed: feasible set died or measure bound violated")
        return 1
    fn = feasibility.reconstruct_evader(trace)
    _write(args.out, feasibility.plfn_to_lines(fn))
    margins = feasibility.evasion_margins(fn, trace.pairs)
    worst = min(margins) if margins else None
    print(f"evader with {len(fn.breakpoints)} breakpoints; min margin {worst}")
    return 0


def _cmd_verify(args) -> int:
    pairs, m, d = feasibility.pairs_from_lines(_read_lines(args.pairs))
    if args.d is not None:
        d = args.d
    if args.exhaustive:
        verdict = feasibility.feasible_control_check(pairs, args.j, d, Fraction(args.n))
        if verdict.controlled:
            print(f"CONTROLLED: feasible set empty after step {verdict.empty_step}")
            return 0
        print("NOT CONTROLLED: witness evader exists")
        if args.out:
            _write(args.out, feasibility.plfn_to_lines(verdict.witness))
        return 1
    # sampled verification
    radius = Fraction(args.radius)
    domain = (
        tuple(-radius for _ in range(m)),
        tuple(radius for _ in range(m)),
    )
    functions = [
        harness.sample_lipschitz(m, d, args.j, domain, Fraction(args.h), args.seed + i)
        for i in range(args.count)
    ]
    report = harness.game_run(pairs, functions)
    print(f"controlled fraction: {report.controlled_fraction}")
    return 0 if report.all_controlled else 1


def _cmd_lemma(args) -> int:
    if args.action != "verify":
        raise ValueError("supported action: verify")
    fn = harness.map_from_lines(_read_lines(args.map))
    l = float(args.l)
    t0 = float(args.t0)
    t1 = float(args.t1)
    p_t0 = Fraction(args.t0)
    p_l = int(args.l)

    def f(z, t):
        return fn.eval_point_float(tuple(z) + (t,))

    def g(y):
        scale = float(p_t0) / (2 * p_l)
        return tuple(scale * (y[k] - y[fn.m - 1]) for k in range(fn.m - 1))

    mm = fixedpoint.MovingMap(
        f=f, g=g, m=fn.m, d=fn.d, l=l, t0=t0, t1=t1,
        d_radius=float(p_t0), lipschitz=float(fn.j),
    )
    try:
        crossing = fixedpoint.find_crossing(
            mm, grid_step=args.grid_step, tol=args.tol
        )
    except CrossingNotFoundError as exc:
        print(f"no crossing: {exc}")
        return 1
    print(
        f"crossing z={crossing.z} t={crossing.t} "
        f"residual_sphere={crossing.residual_sphere:.3e} "
        f"residual_section={crossing.residual_section:.3e}"
    )
    return 0


def _cmd_game(args) -> int:
    pairs, m, d = feasibility.pairs_from_lines(_read_lines(args.pairs))
    radius = Fraction(args.radius)
    domain = (
        tuple(-radius for _ in range(m)),
        tuple(radius for _ in range(m)),
    )
    functions = [
        harness.sample_lipschitz(m, d, args.j, domain, Fraction(args.h), args.seed + i)
        for i in range(args.count)
    ]
    report = harness.game_run(pairs, functions)
    _write(args.out, harness.report_to_lines(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipcontrol",
        description="Controlling pairs for Lipschitz functions at desk scale",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    parser.add_argument("--cap", type=int, default=10 ** 6, help="resource cap for generators")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an example point sequence")
    p.add_argument("--kind", required=True, choices=["lattice", "pow2", "powergrid", "remarkA"])
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--R", default="10")
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--c", default="1")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--growth-power", type=int, default=2)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("density", help="counting function and density ratios")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("control", help="build controlling pairs from a sequence")
    p.add_argument("--mode", required=True, choices=["1d", "md"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--J", type=int, default=1, help="largest budget for 1d schedules")
    p.add_argument("--j", type=int, default=1, help="budget for md assignments")
    p.add_argument("--out", default="-")
    p.add_argument("--assignment", default=None, help="also dump the md ball assignment")
    p.set_defaults(func=_cmd_control)

    p = sub.add_parser("evade", help="propagate feasible sets and reconstruct an evader")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--trace", default=None, help="write the per-step trace CSV here")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_evade)

    p = sub.add_parser("verify", help="check whether pairs control a Lipschitz class")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exhaustive", action="store_true")
    group.add_argument("--sampled", action="store_true")
    p.add_argument("--pairs", required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--n", default="1", help="horizon for the exhaustive oracle")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--h", default="1/4")
    p.add_argument("--radius", default="4")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("lemma", help="verify the boundary-crossing lemma on a sampled map")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--map", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--t0", required=True)
    p.add_argument("--t1", required=True)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-2)
    p.set_defaults(func=_cmd_lemma)

    p = sub.add_parser("game", help="run sampled functions against a pair set")
    p.add_argument("--pairs", required=True)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--h", default="1/4")
    p.add_argument("--radius", default="4")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_game)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LipcontrolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
