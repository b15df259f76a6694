"""
EARLIEST-DEADLINE-FIRST
Event-driven EDF on one machine and the interval density test for deadlines
"""
import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .models import DeadlineAssignment, Instance, Schedule, Slot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeadlineMiss:
    job: int
    deadline: int
    completion: Fraction


@dataclass(frozen=True)
class EdfResult:
    schedule: Schedule
    met_all_deadlines: bool
    first_violation: Optional[DeadlineMiss] = None
    completion: Dict[int, Fraction] = field(default_factory=dict)


def _merge_adjacent(slots: List[Slot]) -> List[Slot]:
    merged: List[Slot] = []
    for slot in slots:
        if merged and merged[-1].job == slot.job and merged[-1].end == slot.start:
            merged[-1] = Slot(0, merged[-1].start, slot.end, slot.job)
        else:
            merged.append(slot)
    return merged


def edf_schedule(instance: Instance, deadlines: DeadlineAssignment) -> EdfResult:
    """
    Run the released, unfinished job with the smallest deadline (ties by id).
    Decisions happen only at releases and completions: between two such
    events the set of available jobs, and so the EDF choice, cannot change.
    """
    due = deadlines.finalized(instance.horizon)
    jobs = instance.jobs
    remaining = {job.id: job.p for job in jobs}
    ready: List[Tuple[int, int]] = []
    slots: List[Slot] = []
    completion: Dict[int, Fraction] = {}

    t = 0
    k = 0
    while k < len(jobs) or ready:
        if not ready and t < jobs[k].r:
            t = jobs[k].r
        while k < len(jobs) and jobs[k].r <= t:
            heapq.heappush(ready, (due[jobs[k].id], jobs[k].id))
            k += 1
        _, job_id = ready[0]
        until = t + remaining[job_id]
        if k < len(jobs) and jobs[k].r < until:
            until = jobs[k].r
        slots.append(Slot(0, t, until, job_id))
        remaining[job_id] -= until - t
        t = until
        if remaining[job_id] == 0:
            heapq.heappop(ready)
            completion[job_id] = Fraction(t)

    misses = [DeadlineMiss(job_id, due[job_id], end) for job_id, end in completion.items() if end > due[job_id]]
    misses.sort(key=lambda miss: (miss.completion, miss.job))
    result = EdfResult(
        schedule=Schedule(tuple(_merge_adjacent(slots))),
        met_all_deadlines=not misses,
        first_violation=misses[0] if misses else None,
        completion=completion,
    )
    if misses:
        logger.debug(f"EDF missed {len(misses)} deadline(s), first: {misses[0]}")
    return result


def density_feasible(instance: Instance, deadlines: DeadlineAssignment) -> bool:
    """
    For every [s, t] the jobs with s <= r_j and d_j <= t must fit in t - s.
    The load only changes when s passes a release or t passes a deadline, so
    s ranges over releases and t over deadlines without losing any interval.
    """
    due = deadlines.finalized(instance.horizon)
    jobs = instance.jobs
    if any(due[job.id] < job.r + job.p for job in jobs):
        return False
    starts = sorted({job.r for job in jobs})
    ends = sorted(set(due))
    for s in starts:
        for t in ends:
            if t < s:
                continue
            load = sum(job.p for job in jobs if job.r >= s and due[job.id] <= t)
            if load > t - s:
                return False
    return True
