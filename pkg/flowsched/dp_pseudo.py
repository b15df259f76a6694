"""
PSEUDOPOLYNOMIAL WEIGHTED FLOW TIME DP
Cells (s, t, b) over the dyadic tree of [0, T) assign deadlines to the jobs
released in [b0, t); EDF on the root cell's deadlines gives the schedule
"""
import bisect
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from .dyadic import DyadicTree
from .edf import edf_schedule
from .errors import InvariantViolation
from .lawler_moore import LmJob, LmProblem, LmSolution, lawler_moore
from .models import INF, CostModel, Deadline, DeadlineAssignment, Instance, Job, Schedule
from .validation import objective, require_valid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PseudoCell:
    s: int
    t: int
    b: int
    deadlines: Mapping[int, Deadline]
    cost: int
    guess: Optional[int] = None


@dataclass(frozen=True)
class PseudoResult:
    deadlines: DeadlineAssignment
    schedule: Schedule
    objective: int
    root_cost: int
    cells: int


def cell_cost(job: Job, deadline: Deadline, s: int, t: int) -> int:
    """0 when the job is settled by s, else w * (min(d, t) - r)"""
    if deadline == s:
        return 0
    return job.w * (min(deadline, t) - job.r)


class PseudoTable:
    """Solved cells keyed by (tree node, b - b0)"""

    def __init__(self, instance: Instance):
        if instance.is_multi:
            raise ValueError("the pseudopolynomial DP works on single-machine instances")
        self.instance = instance
        self.tree = DyadicTree(instance.horizon)
        self.releases = [job.r for job in instance.jobs]
        self.cells: Dict[Tuple[int, int], PseudoCell] = {}
        self._far_cache: Dict[Tuple[int, Tuple[int, ...], int], LmSolution] = {}
        self._near_cache: Dict[Tuple[int, int], Tuple[Dict[int, Deadline], int]] = {}

    def jobs_in(self, lo: int, hi: int) -> Tuple[Job, ...]:
        """Jobs with lo <= r < hi"""
        left = bisect.bisect_left(self.releases, lo)
        right = bisect.bisect_left(self.releases, hi)
        return self.instance.jobs[left:right]

    def store(self, index: int, cell: PseudoCell) -> None:
        self.cells[(index, cell.b - self.tree.earliest_start(index))] = cell

    def cell(self, s: int, t: int, b: int) -> PseudoCell:
        index = self.tree.index_of(s, t)
        key = (index, b - self.tree.earliest_start(index))
        try:
            return self.cells[key]
        except KeyError:
            raise InvariantViolation(f"cell ({s}, {t}, {b}) requested before it was solved")

    def far_solution(self, index: int, far: Tuple[Job, ...], t: int, b: int, guess: int) -> LmSolution:
        # the LM outcome depends only on the reversed deadlines guess - max(r, b)
        limits = tuple(guess - max(job.r, b) for job in far)
        key = (index, limits, guess - b)
        cached = self._far_cache.get(key)
        if cached is None:
            problem = LmProblem(tuple(LmJob(job.p, max(job.r, b), job.w * (t - job.r)) for job in far), guess)
            cached = lawler_moore(problem, b)
            self._far_cache[key] = cached
        return cached

    def near_solution(self, index: int, near: Tuple[Job, ...], guess: int) -> Tuple[Dict[int, Deadline], int]:
        cached = self._near_cache.get((index, guess))
        if cached is not None:
            return cached
        s, t = self.tree.interval(index)
        deadlines: Dict[int, Deadline] = {}
        if t - s == 1:
            for job in near:
                deadlines[job.id] = INF
        else:
            a = (s + t) // 2
            left = self.cell(s, a, guess).deadlines
            right = self.cell(a, t, guess).deadlines
            for job in near:
                late = right.get(job.id)
                if late is not None and late > a:
                    deadlines[job.id] = late
                else:
                    deadlines[job.id] = min(left.get(job.id, INF), a)
        cost = sum(cell_cost(job, deadlines[job.id], s, t) for job in near)
        self._near_cache[(index, guess)] = (deadlines, cost)
        return deadlines, cost

    def __len__(self) -> int:
        return len(self.cells)


def solve_cell(table: PseudoTable, s: int, t: int, b: int) -> PseudoCell:
    """Cheapest deadlines for J(s, t) given no processing before b; children must be solved"""
    tree = table.tree
    index = tree.index_of(s, t)
    b0 = tree.earliest_start(index)
    if not b0 <= b <= s:
        raise ValueError(f"cell ({s}, {t}, {b}) needs {b0} <= b <= {s}")
    members = table.jobs_in(b0, t)
    if not members:
        return PseudoCell(s, t, b, {}, 0)

    split = s - (t - s)
    far = tuple(job for job in members if job.r <= split)
    near = tuple(job for job in members if job.r > split)

    best: Optional[PseudoCell] = None
    for guess in range(max(b, split), s + 1):
        deadlines: Dict[int, Deadline] = {}
        cost = 0
        if far:
            settled = table.far_solution(index, far, t, b, guess)
            on_time = set(settled.on_time)
            for k, job in enumerate(far):
                deadlines[job.id] = s if k in on_time else INF
            cost += settled.penalty
        near_deadlines, near_cost = table.near_solution(index, near, guess)
        deadlines.update(near_deadlines)
        cost += near_cost
        # ascending guesses: ties keep the later one
        if best is None or cost <= best.cost:
            best = PseudoCell(s, t, b, deadlines, cost, guess)
    return best


def solve_pseudo(instance: Instance) -> PseudoResult:
    """Solve every cell bottom-up, then run EDF on the deadlines of (0, T, 0)"""
    table = PseudoTable(instance)
    tree = table.tree
    try:
        for index in tree.bottom_up():
            s, t = tree.interval(index)
            for b in range(tree.earliest_start(index), s + 1):
                table.store(index, solve_cell(table, s, t, b))
    except Exception as e:
        logger.error(f"❌ Pseudopolynomial DP failed on T={instance.horizon}: {e}")
        raise

    root = table.cell(0, instance.horizon, 0)
    deadlines = DeadlineAssignment.from_mapping(root.deadlines, instance.n)
    result = edf_schedule(instance, deadlines)
    if not result.met_all_deadlines:
        raise InvariantViolation(f"EDF missed a root-cell deadline: {result.first_violation}")
    require_valid(instance, result.schedule)
    value = objective(instance, result.schedule, CostModel.weighted_flow())
    logger.debug(f"pseudo DP: {len(table)} cells, root cost {root.cost}, objective {value}")
    return PseudoResult(deadlines, result.schedule, int(value), root.cost, len(table))
