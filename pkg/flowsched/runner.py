"""
ALGORITHM RUNNER
One entry point for every solver: runs it, validates the schedule, computes
the objective under the requested cost model and optionally the oracle ratio
"""
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Union

from .costs import Cost, exact_text, norm_ratio, render
from .dp_poly import solve_poly
from .dp_pseudo import solve_pseudo
from .edf import edf_schedule
from .models import INF, CostModel, DeadlineAssignment, Instance, Schedule
from .oracle import oracle_multi, oracle_single
from .qptas import solve_qptas
from .validation import objective, report_value, require_valid

logger = logging.getLogger(__name__)

ALGORITHMS = ("edf", "pseudo", "poly", "qptas", "oracle")


@dataclass(frozen=True)
class RunReport:
    algorithm: str
    objective: Cost
    reported: Cost
    schedule: Schedule
    wall_ms: float
    cells: int = 0
    oracle: Optional[Cost] = None
    ratio: Optional[Cost] = None
    details: Dict[str, str] = field(default_factory=dict)

    def lines(self) -> List[str]:
        """Deterministic report lines; wall time is logged, not printed"""
        out = [
            f"algorithm: {self.algorithm}",
            f"objective: {exact_text(self.objective)} ({render(self.objective)})",
        ]
        if self.reported != self.objective:
            out.append(f"norm: {render(self.reported)}")
        out.append(f"cells: {self.cells}")
        for key in sorted(self.details):
            out.append(f"{key}: {self.details[key]}")
        if self.oracle is not None:
            out.append(f"oracle: {exact_text(self.oracle)} ({render(self.oracle)})")
            out.append(f"ratio: {exact_text(self.ratio)} ({render(self.ratio)})")
        return out


def single_machine_view(instance: Instance, algorithm: str) -> Instance:
    """Plain processing times for single-machine solvers; a one-row matrix supplies them"""
    if not instance.is_multi:
        return instance
    if instance.m > 1:
        raise ValueError(f"{algorithm} runs on single-machine instances")
    row = instance.machines[0]
    return Instance.from_jobs([(row[job.id], job.r, job.w) for job in instance.by_id])


def _oracle(instance: Instance, model: CostModel, delta: Fraction, migration: bool):
    if instance.is_multi and instance.m > 1:
        return oracle_multi(instance, model, delta, migration)
    return oracle_single(instance, model)


def run_algorithm(algorithm: str, instance: Instance, model: CostModel,
                  deadlines: Optional[DeadlineAssignment] = None,
                  migration: bool = True,
                  delta: Optional[Union[Fraction, int, str]] = None,
                  state_budget: Optional[int] = None,
                  with_oracle: bool = False) -> RunReport:
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
    started = time.perf_counter()
    cells = 0
    details: Dict[str, str] = {}

    if algorithm == "edf":
        assignment = deadlines or DeadlineAssignment(tuple(INF for _ in range(instance.n)))
        result = edf_schedule(single_machine_view(instance, algorithm), assignment)
        schedule = result.schedule
        details["met_all_deadlines"] = str(result.met_all_deadlines).lower()
        if result.first_violation is not None:
            miss = result.first_violation
            details["first_violation"] = f"job {miss.job} due {miss.deadline} completes {miss.completion}"
    elif algorithm == "pseudo":
        result = solve_pseudo(single_machine_view(instance, algorithm))
        schedule = result.schedule
        cells = result.cells
        details["root_cost"] = str(result.root_cost)
    elif algorithm == "poly":
        result = solve_poly(single_machine_view(instance, algorithm), model)
        schedule = result.schedule
        cells = result.cells
        details["root_budget"] = str(result.root_budget)
        details["intervals"] = str(result.intervals)
    elif algorithm == "qptas":
        result = solve_qptas(instance, model, migration=migration, delta=delta, state_budget=state_budget)
        schedule = result.schedule
        cells = result.states
        details["charged"] = exact_text(result.charged)
        details["delta"] = str(result.grid.delta)
    else:
        result = _oracle(instance, model, Fraction(delta or 1), migration)
        schedule = result.schedule
        cells = result.states

    require_valid(instance, schedule)
    value = objective(instance, schedule, model)
    wall_ms = (time.perf_counter() - started) * 1000.0

    optimum = ratio = None
    if with_oracle:
        optimum = _oracle(instance, model, Fraction(delta or 1), migration).objective
        ratio = norm_ratio(value, optimum, model.exponent)

    logger.info(f"✅ {algorithm}: objective {render(value)} in {wall_ms:.1f} ms")
    return RunReport(algorithm, value, report_value(value, model), schedule, wall_ms,
                     cells, optimum, ratio, details)
