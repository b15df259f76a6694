"""
FLOWSCHED COMMAND LINE
gen, solve, edf, lm, validate, compare and bench subcommands.

Exit codes: 0 ok, 1 usage or parse error, 2 resource budget exceeded,
3 invalid schedule or internal invariant violation, 4 edf missed a
deadline. Reports go to stdout
and are identical between runs; logs and timings go to stderr.
"""
import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from .bench import directory_tasks, export_results, generated_tasks, run_bench, dataframe_to_markdown
from .config import BENCH_WORKERS, LOG_FORMAT, LOG_LEVEL, MAX_P_TERM
from .costs import exact_text, render
from .edf import density_feasible, edf_schedule
from .errors import FlowschedError
from .gen import AdversarialKind, GenSpec, gen_adversarial, gen_random
from .lawler_moore import LmProblem, lawler_moore, lm_latest_start
from .models import INF, CostModel, DeadlineAssignment
from .runner import ALGORITHMS, run_algorithm, single_machine_view
from .storage import load_deadlines, load_instance, load_schedule, write_instance, write_schedule
from .validation import validate_schedule

logger = logging.getLogger(__name__)

# edf exit code when some deadline is missed
DEADLINE_MISSED = 4


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; 2 is reserved for exhausted budgets"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _model(args) -> CostModel:
    if args.p.numerator > MAX_P_TERM or args.p.denominator > MAX_P_TERM:
        raise ValueError(f"--p {args.p}: numerator and denominator must be at most {MAX_P_TERM}")
    if args.p == 1:
        return CostModel.weighted_flow(args.epsilon)
    return CostModel.norm(args.p, args.epsilon)


def _emit(lines: Sequence[str]) -> None:
    sys.stdout.write("".join(f"{line}\n" for line in lines))


def cmd_gen(args) -> int:
    if args.adversarial:
        instance = gen_adversarial(args.adversarial, args.n)
    else:
        instance = gen_random(GenSpec(args.n, args.pmax, args.rmax, args.wmax, args.m,
                                      args.inf_density, args.seed, args.matrix))
    payload = write_instance(instance)
    if args.out:
        Path(args.out).write_bytes(payload)
        logger.info(f"✅ Wrote instance with {instance.n} jobs to {args.out}")
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    deadlines = load_deadlines(args.deadlines, instance.n) if args.deadlines else None
    report = run_algorithm(args.algo, instance, _model(args), deadlines=deadlines,
                           migration=args.migration == "on", delta=args.delta,
                           state_budget=args.state_budget, with_oracle=args.oracle)
    if args.out:
        Path(args.out).write_bytes(write_schedule(report.schedule))
    _emit(report.lines())
    return 0


def cmd_edf(args) -> int:
    instance = load_instance(args.instance)
    deadlines = (load_deadlines(args.deadlines, instance.n) if args.deadlines
                 else DeadlineAssignment(tuple(INF for _ in range(instance.n))))
    view = single_machine_view(instance, "edf")
    result = edf_schedule(view, deadlines)
    lines = [f"met_all_deadlines: {str(result.met_all_deadlines).lower()}",
             f"density_feasible: {str(density_feasible(view, deadlines)).lower()}"]
    if result.first_violation is not None:
        miss = result.first_violation
        lines.append(f"first_violation: job {miss.job} due {miss.deadline} completes {miss.completion}")
    for job_id in sorted(result.completion):
        lines.append(f"C[{job_id}] = {result.completion[job_id]}")
    lines.extend(f"[{slot.start}, {slot.end}) job {slot.job}" for slot in result.schedule.slots)
    if args.out:
        Path(args.out).write_bytes(write_schedule(result.schedule))
    _emit(lines)
    return 0 if result.met_all_deadlines else DEADLINE_MISSED


def _parse_jobs(text: str) -> List[tuple]:
    triples = []
    for k, chunk in enumerate(part for part in text.split(";") if part.strip()):
        fields = [field.strip() for field in chunk.split(",")]
        if len(fields) != 3:
            raise ValueError(f"job {k}: expected p,r,c, got {chunk!r}")
        cost = Fraction(fields[2])
        triples.append((int(fields[0]), int(fields[1]), int(cost) if cost.denominator == 1 else cost))
    if not triples:
        raise ValueError("--jobs lists no jobs")
    return triples


def cmd_lm(args) -> int:
    problem = LmProblem.of(_parse_jobs(args.jobs), args.due)
    if args.budget is not None:
        if any(not isinstance(job.c, int) for job in problem.jobs):
            raise ValueError("--budget needs integer costs")
        latest = lm_latest_start(problem, args.budget)
        if not latest.feasible:
            _emit(["start: infeasible"])
            return 0
        solution = latest.solution
    else:
        solution = lawler_moore(problem, args.start)
    lines = [f"start: {solution.start}",
             f"on_time: {' '.join(map(str, solution.on_time)) or '-'}",
             f"late: {' '.join(map(str, solution.late)) or '-'}",
             f"penalty: {solution.penalty}"]
    lines.extend(f"[{slot.start}, {slot.end}) job {slot.job}" for slot in solution.slots)
    _emit(lines)
    return 0


def cmd_validate(args) -> int:
    instance = load_instance(args.instance)
    schedule = load_schedule(args.schedule)
    report = validate_schedule(instance, schedule)
    if report.ok:
        _emit(["valid"])
        return 0
    _emit(["invalid"] + [str(violation) for violation in report.violations])
    return 3


def cmd_compare(args) -> int:
    instance = load_instance(args.instance)
    model = _model(args)
    rows = []
    for algorithm in [name.strip() for name in args.algos.split(",") if name.strip()]:
        report = run_algorithm(algorithm, instance, model, migration=args.migration == "on",
                               delta=args.delta, with_oracle=args.oracle)
        rows.append({
            "algo": algorithm,
            "objective": exact_text(report.objective),
            "value": render(report.objective),
            "ratio": render(report.ratio) if report.ratio is not None else "",
            "cells": report.cells,
        })
    _emit([dataframe_to_markdown(pd.DataFrame(rows, columns=["algo", "objective", "value", "ratio", "cells"]))])
    return 0


def cmd_bench(args) -> int:
    model = _model(args)
    algorithms = [name.strip() for name in args.algos.split(",") if name.strip()]
    migration = args.migration == "on"
    if args.instances:
        tasks = directory_tasks(Path(args.instances), algorithms, model, args.oracle, migration, args.delta)
    else:
        spec = GenSpec(args.n, args.pmax, args.rmax, args.wmax, args.m, args.inf_density, args.seed, args.matrix)
        tasks = generated_tasks(spec, args.count, algorithms, model, args.oracle, migration, args.delta)
    table = run_bench(tasks, workers=args.workers)
    export_results(table, args.csv, args.markdown)
    if not args.csv:
        sys.stdout.write(table.to_csv(index=False))
    return 0


def _add_generator_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, default=5, help="Number of jobs")
    parser.add_argument("--pmax", type=int, default=4, help="Largest processing time")
    parser.add_argument("--rmax", type=int, default=8, help="Largest release time")
    parser.add_argument("--wmax", type=int, default=5, help="Largest weight")
    parser.add_argument("--m", type=int, default=1, help="Number of machines")
    parser.add_argument("--inf-density", type=float, default=0.0, help="Share of INF matrix entries")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    parser.add_argument("--matrix", action="store_true", help="Emit a machine matrix even for m = 1")


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=Fraction, default=Fraction(1), help="Flow-time exponent (default: 1)")
    parser.add_argument("--epsilon", type=Fraction, default=Fraction(1, 2), help="Accuracy (default: 1/2)")
    parser.add_argument("--delta", type=Fraction, default=None, help="QPTAS/oracle time step 1/k")
    parser.add_argument("--migration", choices=["on", "off"], default="on",
                        help="off keeps every job on one machine (default: on)")
    parser.add_argument("--oracle", action="store_true", help="Also run the exact oracle and report the ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flowsched", description="Preemptive weighted flow time scheduling")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Generate an instance")
    _add_generator_options(gen)
    gen.add_argument("--adversarial", choices=[kind.value for kind in AdversarialKind], help="Named family")
    gen.add_argument("--out", help="Output file (default: stdout)")
    gen.set_defaults(handler=cmd_gen)

    solve = commands.add_parser("solve", help="Run one algorithm on an instance",
                                description="Run one algorithm on an instance. The report omits wall time; "
                                            "it is logged on stderr (use -v for the debug trail).")
    solve.add_argument("--algo", choices=ALGORITHMS, required=True)
    solve.add_argument("--instance", required=True)
    solve.add_argument("--deadlines", help="Deadline file for --algo edf")
    solve.add_argument("--state-budget", type=int, default=None, help="QPTAS state budget")
    solve.add_argument("--out", help="Write the schedule here")
    _add_model_options(solve)
    solve.set_defaults(handler=cmd_solve)

    edf = commands.add_parser("edf", help="EDF schedule and density test for a deadline file")
    edf.add_argument("--instance", required=True)
    edf.add_argument("--deadlines")
    edf.add_argument("--out")
    edf.set_defaults(handler=cmd_edf)

    lm = commands.add_parser("lm", help="Lawler-Moore on a common due date")
    lm.add_argument("--jobs", required=True, help='Jobs as "p,r,c;p,r,c;..."')
    lm.add_argument("--due", type=int, required=True)
    lm.add_argument("--start", type=int, default=0)
    lm.add_argument("--budget", type=int, default=None, help="Latest start within this late penalty")
    lm.set_defaults(handler=cmd_lm)

    validate = commands.add_parser("validate", help="Check a schedule against an instance")
    validate.add_argument("--instance", required=True)
    validate.add_argument("--schedule", required=True)
    validate.set_defaults(handler=cmd_validate)

    compare = commands.add_parser("compare", help="Run several algorithms on one instance")
    compare.add_argument("--instance", required=True)
    compare.add_argument("--algos", default="pseudo,poly")
    _add_model_options(compare)
    compare.set_defaults(handler=cmd_compare)

    bench = commands.add_parser("bench", help="Benchmark algorithms over many instances")
    _add_generator_options(bench)
    _add_model_options(bench)
    bench.add_argument("--algos", default="pseudo,poly")
    bench.add_argument("--count", type=int, default=10, help="Generated instances (consecutive seeds)")
    bench.add_argument("--instances", help="Directory of *.json instances instead of generated ones")
    bench.add_argument("--csv", help="CSV output path (default: stdout)")
    bench.add_argument("--markdown", help="Markdown summary path")
    bench.add_argument("--workers", type=int, default=BENCH_WORKERS)
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL, format=LOG_FORMAT)

    try:
        return args.handler(args)
    except FlowschedError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    except ValueError as e:
        logger.error(f"❌ {args.command}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
