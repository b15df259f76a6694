"""
SCHEDULE VALIDATION AND OBJECTIVE
Checks a schedule against an instance and evaluates the flow-time objective
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .costs import Cost, p_root, total_cost, weighted_cost
from .errors import ScheduleValidationError
from .models import INF, CostModel, Instance, Schedule

logger = logging.getLogger(__name__)

MACHINE_OVERLAP = "machine overlap"
BEFORE_RELEASE = "starts before release"
INCOMPLETE = "incomplete processing"
EXCESS = "excess processing"
PARALLEL = "job runs in parallel"
UNKNOWN_JOB = "unknown job"
INVALID_MACHINE = "invalid machine"
INFEASIBLE_MACHINE = "infeasible machine"
EMPTY_SLOT = "empty slot"


@dataclass(frozen=True)
class Violation:
    kind: str
    job: Optional[int] = None
    machine: Optional[int] = None
    time: Optional[Fraction] = None
    detail: str = ""

    def __str__(self) -> str:
        where = []
        if self.job is not None:
            where.append(f"job {self.job}")
        if self.machine is not None:
            where.append(f"machine {self.machine}")
        if self.time is not None:
            where.append(f"t={self.time}")
        text = self.kind + (f" ({', '.join(where)})" if where else "")
        return f"{text}: {self.detail}" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None

    def kinds(self) -> List[str]:
        return [violation.kind for violation in self.violations]


def validate_schedule(instance: Instance, schedule: Schedule) -> ValidationReport:
    violations: List[Violation] = []
    usable = []
    for slot in schedule.slots:
        if not 0 <= slot.job < instance.n:
            violations.append(Violation(UNKNOWN_JOB, slot.job, slot.machine, slot.start))
        elif not 0 <= slot.machine < instance.m:
            violations.append(Violation(INVALID_MACHINE, slot.job, slot.machine, slot.start))
        elif slot.end <= slot.start:
            violations.append(Violation(EMPTY_SLOT, slot.job, slot.machine, slot.start))
        else:
            job = instance.job(slot.job)
            if slot.start < job.r:
                violations.append(Violation(BEFORE_RELEASE, job.id, slot.machine, slot.start,
                                            f"released at {job.r}"))
            if instance.processing(slot.machine, job.id) == INF:
                violations.append(Violation(INFEASIBLE_MACHINE, job.id, slot.machine, slot.start))
            else:
                usable.append(slot)

    busy_until: Dict[int, Tuple[Fraction, int]] = {}
    for slot in usable:
        previous = busy_until.get(slot.machine)
        if previous is not None and previous[0] > slot.start:
            violations.append(Violation(MACHINE_OVERLAP, slot.job, slot.machine, slot.start,
                                        f"job {previous[1]} still running until {previous[0]}"))
        if previous is None or slot.end > previous[0]:
            busy_until[slot.machine] = (slot.end, slot.job)

    by_job = defaultdict(list)
    for slot in usable:
        by_job[slot.job].append(slot)
    for job in instance.by_id:
        slots = sorted(by_job.get(job.id, []), key=lambda s: (s.start, s.end, s.machine))
        for before, after in zip(slots, slots[1:]):
            if after.start < before.end:
                violations.append(Violation(PARALLEL, job.id, after.machine, after.start))
        if instance.is_multi:
            done = sum((slot.length / instance.processing(slot.machine, job.id) for slot in slots), Fraction(0))
            if done < 1:
                violations.append(Violation(INCOMPLETE, job.id, detail=f"processed fraction {done}"))
        else:
            done = sum((slot.length for slot in slots), Fraction(0))
            if done < job.p:
                violations.append(Violation(INCOMPLETE, job.id, detail=f"{done} of {job.p}"))
            elif done > job.p:
                violations.append(Violation(EXCESS, job.id, detail=f"{done} of {job.p}"))

    return ValidationReport(tuple(violations))


def require_valid(instance: Instance, schedule: Schedule) -> None:
    report = validate_schedule(instance, schedule)
    if not report.ok:
        logger.error(f"❌ Invalid schedule: {report.first}")
        raise ScheduleValidationError(report)


def objective(instance: Instance, schedule: Schedule, model: CostModel) -> Cost:
    """Sum of w_j * F_j^p; the 1/p root is left to reporting"""
    require_valid(instance, schedule)
    p = model.exponent
    completion = schedule.completion
    return total_cost((weighted_cost(job.w, completion[job.id] - job.r, p) for job in instance.by_id), p)


def report_value(total: Cost, model: CostModel) -> Cost:
    """The reported norm: total^(1/p)"""
    if model.exponent == 1:
        return total
    return p_root(total, model.exponent)
