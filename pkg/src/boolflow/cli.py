"""Command-line interface.

Subcommands: generate, solve, oracle, sweep, table, traj.  Exit codes: 0 on
full success, 2 when any run diverged, 1 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import (
    ExperimentConfig,
    emit_table,
    parameter_sweep,
    read_run_log,
    run_experiment,
    write_run_log,
)
from .integrators import SCHEMES, SchemeParams, SolveStatus, multistart
from .model import BooleanProblem, PenaltyModel, recover_x
from .oracle import exhaustive_min
from .polynomial import InstanceSpec, load_instance, random_poly, save_instance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DIVERGED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="boolflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a seeded random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--coeff-lo", type=int, default=-10)
    g.add_argument("--coeff-hi", type=int, default=10)
    g.add_argument("--sparsity", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)

    def add_solver_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--in", dest="infile", type=Path, required=True, help="instance JSON")
        p.add_argument("--domain", choices=("pm1", "binary"), default="pm1",
                       help="variable domain of the instance polynomial")
        p.add_argument("--scheme", choices=sorted(SCHEMES), default="houbolt")
        p.add_argument("--eps", type=float, default=1e-4)
        p.add_argument("--gamma", type=float, default=50.0)
        p.add_argument("--m", type=float, default=1.0)
        p.add_argument("--c", type=float, default=100.0)
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--tau-mode", choices=("fixed", "variable"), default="fixed")
        p.add_argument("--theta", type=float, default=0.8)
        p.add_argument("--t-final", type=float, default=1.0)
        p.add_argument("--tol-step", type=float, default=1e-6)
        p.add_argument("--max-iters", type=int, default=100_000)
        p.add_argument("--starts", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("solve", help="solve one instance")
    add_solver_args(s)
    s.add_argument("--out", type=Path, default=None, help="write the report as JSON")
    s.add_argument("--dump-traj", type=Path, default=None, help="write the trajectory CSV")

    o = sub.add_parser("oracle", help="exhaustive minimum over the sign cube")
    o.add_argument("--in", dest="infile", type=Path, required=True)
    o.add_argument("--max-n", type=int, default=24)
    o.add_argument("--json", action="store_true", help="machine-readable output")

    w = sub.add_parser("sweep", help="run an experiment grid from a config file")
    w.add_argument("--config", type=Path, required=True)
    w.add_argument("--axis", choices=("epsilon", "gamma", "m", "c", "tau"), default=None)
    w.add_argument("--values", type=str, default=None, help="comma-separated axis values")
    w.add_argument("--out", type=Path, required=True, help="run log (JSON lines)")
    w.add_argument("--summary", type=Path, default=None, help="sweep summary JSON")

    t = sub.add_parser("table", help="render a run log as a CSV summary table")
    t.add_argument("--log", type=Path, required=True)
    t.add_argument("--layout", choices=("table1", "table3", "table4"), default="table1")
    t.add_argument("--out", type=Path, default=None)

    tr = sub.add_parser(
        "traj", help="re-run one instance deterministically and dump its trajectory"
    )
    add_solver_args(tr)
    tr.add_argument("--out", type=Path, required=True, help="trajectory CSV path")
    return parser


def _solve_from_args(args: argparse.Namespace, record_trajectory: bool):
    poly, _, _ = load_instance(args.infile)
    problem = (
        BooleanProblem.from_pm1(poly) if args.domain == "pm1" else BooleanProblem.from_binary(poly)
    )
    model = PenaltyModel(problem, epsilon=args.eps, c=args.c)
    params = SchemeParams(
        m=args.m,
        gamma=args.gamma,
        tau0=args.tau,
        theta=args.theta,
        tau_mode=args.tau_mode,
        t_final=args.t_final,
        tol_step=args.tol_step,
        max_iters=args.max_iters,
    )
    if args.starts == 1:
        solver = SCHEMES[args.scheme]
        report = solver(
            model, params, np.zeros(model.n), None, record_trajectory=record_trajectory
        )
        reports = [report]
    else:
        report, reports = multistart(
            args.scheme, model, params, args.starts, args.seed,
            record_trajectory=record_trajectory,
        )
    return model, report, reports


def _report_dict(report) -> dict:
    return {
        "scheme": report.scheme,
        "status": report.status.value,
        "u": [float(x) for x in report.u],
        "rounded": [int(x) for x in report.rounded],
        "x": [int(x) for x in recover_x(report.rounded)],
        "delta": report.delta if np.isfinite(report.delta) else None,
        "objective": report.objective if np.isfinite(report.objective) else None,
        "j_eps": report.j_eps if np.isfinite(report.j_eps) else None,
        "residual": report.residual if np.isfinite(report.residual) else None,
        "iterations": report.iterations,
        "rejected_steps": report.rejected_steps,
        "wall_time": report.wall_time,
    }


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "generate":
        try:
            spec = InstanceSpec(
                n=args.n, d=args.d, coeff_lo=args.coeff_lo, coeff_hi=args.coeff_hi,
                sparsity=args.sparsity, seed=args.seed,
            )
            poly = random_poly(spec)
        except ValueError as exc:
            print(f"boolflow generate: {exc}", file=sys.stderr)
            return EXIT_USAGE
        save_instance(args.out, poly, spec=spec)
        print(f"wrote {args.out} (n={poly.nvars}, degree={poly.degree()}, terms={poly.num_terms()})")
        return EXIT_OK

    if args.command == "solve":
        model, report, _ = _solve_from_args(args, record_trajectory=args.dump_traj is not None)
        data = _report_dict(report)
        if args.out is not None:
            args.out.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        if args.dump_traj is not None and report.trajectory is not None:
            report.trajectory.to_csv(args.dump_traj)
        print(
            f"{report.scheme}: {report.status.value} after {report.iterations} iterations; "
            f"objective at rounding = {data['objective']}, delta = {data['delta']}"
        )
        return EXIT_DIVERGED if report.status is SolveStatus.DIVERGED else EXIT_OK

    if args.command == "oracle":
        poly, _, _ = load_instance(args.infile)
        try:
            result = exhaustive_min(poly, max_n=args.max_n)
        except ValueError as exc:
            print(f"boolflow oracle: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if args.json:
            print(
                json.dumps(
                    {
                        "value": result.value,
                        "u_star": [int(x) for x in result.u_star],
                        "count": result.count,
                        "size": result.size,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(f"optimal value: {result.value}")
            print(f"optimal vector: {[int(x) for x in result.u_star]}")
            print(f"optimal count: {result.count} of {result.size}")
        return EXIT_OK

    if args.command == "sweep":
        cfg = ExperimentConfig.load(args.config)
        if args.axis is not None:
            if not args.values:
                print("boolflow sweep: --axis requires --values", file=sys.stderr)
                return EXIT_USAGE
            values = [float(v) for v in args.values.split(",")]
            records, summary = parameter_sweep(cfg, args.axis, values)
            if args.summary is not None:
                args.summary.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        else:
            records = run_experiment(cfg)
        write_run_log(records, args.out)
        bad = sum(1 for r in records if r.status != SolveStatus.CONVERGED.value)
        print(f"wrote {len(records)} records to {args.out} ({bad} non-converged)")
        diverged = any(
            r.status in (SolveStatus.DIVERGED.value, "Failed") for r in records
        )
        return EXIT_DIVERGED if diverged else EXIT_OK

    if args.command == "table":
        records = read_run_log(args.log)
        text = emit_table(records, args.layout)
        if args.out is not None:
            args.out.write_text(text)
            print(f"wrote {args.out}")
        else:
            print(text, end="")
        return EXIT_OK

    if args.command == "traj":
        model, report, _ = _solve_from_args(args, record_trajectory=True)
        report.trajectory.to_csv(args.out)
        print(
            f"wrote {args.out} ({len(report.trajectory.k)} rows, "
            f"status {report.status.value})"
        )
        return EXIT_DIVERGED if report.status is SolveStatus.DIVERGED else EXIT_OK

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
