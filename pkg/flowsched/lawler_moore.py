"""
LAWLER-MOORE LATE-JOB SELECTION
Minimum-penalty on-time sets for a common deadline, and the budgeted
variant that maximizes the latest start time
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .models import Slot

logger = logging.getLogger(__name__)

Penalty = Union[int, Fraction]

# marks budget states with no feasible on-time block
NO_START = np.iinfo(np.int64).min // 4


@dataclass(frozen=True)
class LmJob:
    p: int
    r: int
    c: Penalty

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"processing time must be >= 1, got {self.p}")
        if self.r < 0:
            raise ValueError(f"release time must be >= 0, got {self.r}")
        if self.c < 0:
            raise ValueError(f"cost must be >= 0, got {self.c}")


@dataclass(frozen=True)
class LmProblem:
    jobs: Tuple[LmJob, ...]
    due: int

    @classmethod
    def of(cls, triples: Sequence[Tuple[int, int, Penalty]], due: int) -> "LmProblem":
        return cls(tuple(LmJob(p, r, c) for p, r, c in triples), due)

    @property
    def total_cost(self) -> Penalty:
        return sum(job.c for job in self.jobs)


@dataclass(frozen=True)
class LmSolution:
    """Indices refer to positions in LmProblem.jobs; slots form one block ending at the due date"""
    on_time: Tuple[int, ...]
    late: Tuple[int, ...]
    penalty: Penalty
    slots: Tuple[Slot, ...]
    start: int


def _block(problem: LmProblem, ordered_on_time: List[int]) -> Tuple[Slot, ...]:
    # on-time jobs listed in processing order, packed right up to the due date
    end = problem.due
    slots = []
    for k in reversed(ordered_on_time):
        begin = end - problem.jobs[k].p
        slots.append(Slot(0, begin, end, k))
        end = begin
    return tuple(reversed(slots))


def lawler_moore(problem: LmProblem, start: int) -> LmSolution:
    """
    Minimum-penalty on-time set when no job may run before max(r_j, start).

    Reversing time turns the common due date into time 0 and each release
    into an individual deadline due - max(r_j, start); the classic DP for the
    weighted number of late jobs then runs over the jobs in that deadline
    order and the consumed reversed time. Among optimal sets the one with the
    least on-time processing wins, then the set keeping earlier jobs of that
    order on time.
    """
    if start > problem.due:
        raise ValueError(f"start {start} is after the due date {problem.due}")
    jobs = problem.jobs
    limits = [problem.due - max(job.r, start) for job in jobs]
    order = sorted((k for k in range(len(jobs)) if limits[k] >= jobs[k].p), key=lambda k: (limits[k], k))
    capacity = max((limits[k] for k in order), default=0)

    # best[i][u]: (on-time cost, -on-time processing) over order[i:], u reversed time used
    best = [[(0, 0)] * (capacity + 1) for _ in range(len(order) + 1)]
    for i in reversed(range(len(order))):
        job = jobs[order[i]]
        limit = limits[order[i]]
        row, below = best[i], best[i + 1]
        for u in range(capacity + 1):
            skip = below[u]
            if u + job.p <= limit:
                value, processing = below[u + job.p]
                take = (value + job.c, processing - job.p)
                row[u] = take if take >= skip else skip
            else:
                row[u] = skip

    chosen = []
    u = 0
    for i, k in enumerate(order):
        job = jobs[k]
        if u + job.p <= limits[k]:
            value, processing = best[i + 1][u + job.p]
            if (value + job.c, processing - job.p) >= best[i + 1][u]:
                chosen.append(k)
                u += job.p

    on_time = tuple(sorted(chosen))
    late = tuple(k for k in range(len(jobs)) if k not in set(chosen))
    penalty = sum(jobs[k].c for k in late)
    # reversed order of the deadline sort is the forward processing order
    slots = _block(problem, list(reversed(chosen)))
    return LmSolution(on_time, late, penalty, slots, problem.due - u)


class LmProfile:
    """
    Latest feasible start of the on-time block for every integer budget up to `cap`.

    Row `pos` covers the jobs from position `pos` of the release order on;
    `table[pos][B]` is the latest start of their on-time block when at most
    B may be paid for late jobs, or NO_START. Costs must be integers.
    """

    def __init__(self, problem: LmProblem, cap: Optional[int] = None):
        self.problem = problem
        jobs = problem.jobs
        total = int(sum(job.c for job in jobs))
        self.cap = total if cap is None else max(0, min(int(cap), total))
        self.order = sorted(range(len(jobs)), key=lambda k: (jobs[k].r, k))

        width = self.cap + 1
        table = np.full((len(jobs) + 1, width), NO_START, dtype=np.int64)
        table[len(jobs), :] = problem.due
        for pos in reversed(range(len(jobs))):
            job = jobs[self.order[pos]]
            below = table[pos + 1]
            on_time = below - job.p
            on_time = np.where((below != NO_START) & (on_time >= job.r), on_time, NO_START)
            late = np.full(width, NO_START, dtype=np.int64)
            if job.c <= self.cap:
                late[job.c:] = below[:width - job.c]
            table[pos] = np.maximum(on_time, late)
        self.table = table

    def start_at(self, budget: int) -> Optional[int]:
        if budget < 0:
            return None
        value = int(self.table[0, min(budget, self.cap)])
        return None if value == NO_START else value

    def solution_at(self, budget: int) -> Optional[LmSolution]:
        """Partition behind start_at(budget); on-time is preferred whenever it keeps the start"""
        start = self.start_at(budget)
        if start is None:
            return None
        jobs = self.problem.jobs
        remaining = min(budget, self.cap)
        on_time: List[int] = []
        late: List[int] = []
        for pos, k in enumerate(self.order):
            value = self.table[pos, remaining]
            below = self.table[pos + 1, remaining]
            if below != NO_START and below - jobs[k].p >= jobs[k].r and below - jobs[k].p == value:
                on_time.append(k)
            else:
                late.append(k)
                remaining -= jobs[k].c
        penalty = sum(jobs[k].c for k in late)
        return LmSolution(tuple(sorted(on_time)), tuple(sorted(late)), penalty,
                          _block(self.problem, on_time), start)

    def breakpoints(self) -> List[Tuple[int, int]]:
        """(budget, start) pairs where the latest start strictly increases"""
        points: List[Tuple[int, int]] = []
        row = self.table[0]
        feasible = np.nonzero(row != NO_START)[0]
        if feasible.size == 0:
            return points
        first = int(feasible[0])
        points.append((first, int(row[first])))
        rises = np.nonzero(row[first + 1:] > row[first:-1])[0]
        for offset in rises:
            budget = first + 1 + int(offset)
            points.append((budget, int(row[budget])))
        return points


@dataclass(frozen=True)
class LatestStart:
    start: Optional[int]
    solution: Optional[LmSolution]

    @property
    def feasible(self) -> bool:
        return self.start is not None


def lm_latest_start(problem: LmProblem, budget: int) -> LatestStart:
    """Latest start of the on-time block with late penalty at most `budget`"""
    if budget < 0:
        return LatestStart(None, None)
    profile = LmProfile(problem, cap=budget)
    solution = profile.solution_at(budget)
    return LatestStart(solution.start if solution else None, solution)
