"""
POLYNOMIAL-TIME BUDGETED DP
Weighted p-norm of flow time: flow costs are floored to multiples of
eps/n * LB and every interval of the dyadic tree keeps, per budget, the
latest start from which its jobs can meet the deadlines it assigns
"""
import bisect
import logging
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Set, Tuple

from .costs import Cost, approximation_factor, floor_units, lower_power, to_decimal
from .dyadic import DyadicTree
from .edf import edf_schedule
from .errors import InvariantViolation
from .lawler_moore import LmJob, LmProblem, LmProfile, lm_latest_start
from .models import INF, CostModel, Deadline, DeadlineAssignment, Instance, Job, Schedule
from .validation import objective, report_value, require_valid

logger = logging.getLogger(__name__)


def floor_to_unit(x: Fraction, unit: Fraction) -> Fraction:
    """Largest integer multiple of unit that is at most x"""
    if x < 0:
        raise ValueError(f"cannot floor a negative cost {x}")
    return (Fraction(x) // unit) * unit


@dataclass(frozen=True)
class BudgetGrid:
    """Budgets are integer counts of `unit` between 0 and `max_units`"""
    p: Fraction
    epsilon: Fraction
    n: int
    lower_bound: Fraction
    unit: Fraction
    max_units: int

    @classmethod
    def for_instance(cls, instance: Instance, model: CostModel) -> "BudgetGrid":
        p = model.exponent
        n = instance.n
        # LB = sum w p_j^p, taken from below for fractional p so the unit stays exact
        lower_bound = sum((job.w * lower_power(job.p, p) for job in instance.jobs), Fraction(0))
        unit = model.epsilon / n * lower_bound
        factor = approximation_factor(p)
        if isinstance(factor, Fraction):
            max_units = int(factor * Fraction(n) ** (p.numerator + 1) / model.epsilon)
        else:
            max_units = int(factor * Decimal(n) ** (to_decimal(p) + 1) / to_decimal(model.epsilon))
        return cls(p, model.epsilon, n, lower_bound, unit, max_units)

    def units(self, w: int, flow: int) -> int:
        return floor_units(w, flow, self.p, self.unit)

    def to_cost(self, units: int) -> Fraction:
        return units * self.unit


@dataclass(frozen=True)
class PolyEntry:
    """
    Cell solution: charged budget in units, latest start, deadlines of
    J(s, t) by job id, and the (B0, B1, B2) split it was built from.
    """
    budget: int
    start: int
    deadlines: Mapping[int, Deadline]
    split: Tuple[int, int, int] = (0, 0, 0)


@dataclass(frozen=True)
class PolyResult:
    deadlines: DeadlineAssignment
    schedule: Schedule
    objective: Cost
    reported: Cost
    root_units: int
    root_budget: Fraction
    grid: BudgetGrid
    intervals: int
    cells: int


class PolyTable:
    """
    Pareto frontiers per materialized interval: entries have strictly
    increasing budget and start, so the entry with the largest budget
    not above B carries the latest start reachable with budget B.
    """

    def __init__(self, instance: Instance, grid: BudgetGrid, capped: bool = True):
        if instance.is_multi:
            raise ValueError("the budgeted DP works on single-machine instances")
        self.instance = instance
        self.grid = grid
        self.limit: Optional[int] = grid.max_units if capped else None
        self.tree = DyadicTree(instance.horizon)
        self.releases = [job.r for job in instance.jobs]
        self.frontiers: Dict[int, Tuple[PolyEntry, ...]] = {}
        self._profiles: Dict[Tuple[int, int], LmProfile] = {}
        self.intervals: Set[int] = self._materialize()

    def _materialize(self) -> Set[int]:
        """Intervals [s, t) with a release in [s - 7(t-s), t + (t-s))"""
        horizon = self.tree.horizon
        chosen: Set[int] = set()
        for r in sorted(set(self.releases)):
            size = horizon
            while size >= 1:
                # r - 2L < s <= r + 7L, s a multiple of L inside [0, T - L]
                first = max(0, (r - 2 * size) // size + 1)
                last = min((r + 7 * size) // size, horizon // size - 1)
                for slot in range(first, last + 1):
                    chosen.add(self.tree.index_of(slot * size, slot * size + size))
                size //= 2
        return chosen

    def jobs_in(self, lo: int, hi: int) -> Tuple[Job, ...]:
        left = bisect.bisect_left(self.releases, lo)
        right = bisect.bisect_left(self.releases, hi)
        return self.instance.jobs[left:right]

    def members(self, index: int) -> Tuple[Job, ...]:
        s, t = self.tree.interval(index)
        return self.jobs_in(self.tree.earliest_start(index), t)

    def cost_units(self, job: Job, deadline: Deadline, s: int, t: int) -> int:
        if deadline == s:
            return 0
        return self.grid.units(job.w, min(deadline, t) - job.r)

    def frontier(self, index: int) -> Tuple[PolyEntry, ...]:
        found = self.frontiers.get(index)
        if found is not None:
            return found
        if not self.members(index):
            s, _ = self.tree.interval(index)
            return (PolyEntry(0, s, {}),)
        s, t = self.tree.interval(index)
        raise InvariantViolation(f"interval [{s}, {t}) holds jobs but was not materialized")

    def lookup(self, s: int, t: int, budget: int) -> Optional[PolyEntry]:
        """Stored solution of cell (s, t, budget), None when infeasible"""
        entries = self.frontier(self.tree.index_of(s, t))
        position = bisect.bisect_right([entry.budget for entry in entries], budget)
        return entries[position - 1] if position else None

    def far_problem(self, far: Tuple[Job, ...], s: int, t: int, guess: int) -> LmProblem:
        return LmProblem(tuple(LmJob(job.p, job.r, self.cost_units(job, INF, s, t)) for job in far), guess)

    def far_profile(self, index: int, far: Tuple[Job, ...], guess: int) -> LmProfile:
        profile = self._profiles.get((index, guess))
        if profile is None:
            s, t = self.tree.interval(index)
            profile = LmProfile(self.far_problem(far, s, t, guess), cap=self.limit)
            self._profiles[(index, guess)] = profile
        return profile

    @property
    def cells(self) -> int:
        return sum(len(entries) for entries in self.frontiers.values())


def _split_jobs(members: Tuple[Job, ...], s: int, t: int) -> Tuple[Tuple[Job, ...], Tuple[Job, ...]]:
    split = s - (t - s)
    return (tuple(job for job in members if job.r <= split),
            tuple(job for job in members if job.r > split))


def _merge(near: Tuple[Job, ...], left: Mapping[int, Deadline], right: Mapping[int, Deadline],
           a: int) -> Dict[int, Deadline]:
    deadlines: Dict[int, Deadline] = {}
    for job in near:
        late = right.get(job.id)
        if late is not None and late > a:
            deadlines[job.id] = late
        else:
            deadlines[job.id] = min(left.get(job.id, INF), a)
    return deadlines


def _far_deadlines(profile: LmProfile, far: Tuple[Job, ...], budget: int, s: int) -> Dict[int, Deadline]:
    solution = profile.solution_at(budget)
    on_time = set(solution.on_time)
    return {job.id: (s if k in on_time else INF) for k, job in enumerate(far)}


def solve_interval(table: PolyTable, index: int) -> Tuple[PolyEntry, ...]:
    """Frontier of every budget for one interval; children must be solved"""
    tree = table.tree
    s, t = tree.interval(index)
    members = table.members(index)
    if not members:
        return (PolyEntry(0, s, {}),)
    far, near = _split_jobs(members, s, t)
    limit = table.limit
    candidates = []

    if t - s == 1:
        base = sum(table.cost_units(job, INF, s, t) for job in near)
        if limit is None or base <= limit:
            profile = table.far_profile(index, far, s)
            for spent, start in profile.breakpoints():
                if limit is not None and base + spent > limit:
                    break
                candidates.append((base + spent, start, (spent, base, 0), None, None, s))
    else:
        a = (s + t) // 2
        lefts = table.frontier(2 * index)
        rights = table.frontier(2 * index + 1)
        for first in lefts:
            for second in rights:
                children = first.budget + second.budget
                if limit is not None and children > limit:
                    continue
                guess = min(first.start, second.start)
                profile = table.far_profile(index, far, guess)
                for spent, start in profile.breakpoints():
                    if limit is not None and spent + children > limit:
                        break
                    candidates.append((spent + children, start, (spent, first.budget, second.budget),
                                       first, second, guess))

    candidates.sort(key=lambda c: (c[0], -c[1], c[2]))
    entries: List[PolyEntry] = []
    for total, start, split, first, second, guess in candidates:
        if entries and start <= entries[-1].start:
            continue
        profile = table.far_profile(index, far, guess)
        deadlines = _far_deadlines(profile, far, split[0], s)
        if first is None:
            deadlines.update({job.id: INF for job in near})
        else:
            deadlines.update(_merge(near, first.deadlines, second.deadlines, (s + t) // 2))
        entries.append(PolyEntry(total, start, deadlines, split))
    return tuple(entries)


def solve_cell_poly(table: PolyTable, s: int, t: int, budget: int) -> Optional[PolyEntry]:
    """
    Direct evaluation of cell (s, t, budget) over budget triples
    B0 + B1 + B2 = budget, reading children from the table. Keeps the
    latest start; ties go to the lexicographically smallest triple.
    """
    tree = table.tree
    index = tree.index_of(s, t)
    members = table.members(index)
    if not members:
        return PolyEntry(budget, s, {})
    far, near = _split_jobs(members, s, t)

    if t - s == 1:
        base = sum(table.cost_units(job, INF, s, t) for job in near)
        if budget < base:
            return None
        found = lm_latest_start(table.far_problem(far, s, t, s), budget - base)
        if not found.feasible:
            return None
        deadlines = {job.id: (s if k in set(found.solution.on_time) else INF) for k, job in enumerate(far)}
        deadlines.update({job.id: INF for job in near})
        return PolyEntry(budget, found.start, deadlines, (budget - base, base, 0))

    a = (s + t) // 2
    best: Optional[PolyEntry] = None
    for spent in range(budget + 1):
        for left_budget in range(budget - spent + 1):
            right_budget = budget - spent - left_budget
            first = table.lookup(s, a, left_budget)
            second = table.lookup(a, t, right_budget)
            if first is None or second is None:
                continue
            guess = min(first.start, second.start)
            found = lm_latest_start(table.far_problem(far, s, t, guess), spent)
            if not found.feasible or (best is not None and found.start <= best.start):
                continue
            deadlines = {job.id: (s if k in set(found.solution.on_time) else INF) for k, job in enumerate(far)}
            deadlines.update(_merge(near, first.deadlines, second.deadlines, a))
            best = PolyEntry(budget, found.start, deadlines, (spent, left_budget, right_budget))
    return best


def build_table(instance: Instance, model: CostModel, capped: bool = True) -> PolyTable:
    grid = BudgetGrid.for_instance(instance, model)
    table = PolyTable(instance, grid, capped=capped)
    tree = table.tree
    for index in tree.bottom_up():
        if index in table.intervals:
            table.frontiers[index] = solve_interval(table, index)
    return table


def solve_poly(instance: Instance, model: CostModel) -> PolyResult:
    """EDF on the deadlines of the cheapest feasible root cell"""
    try:
        table = build_table(instance, model)
        roots = table.frontier(1)
        if not roots:
            logger.warning(f"⚠️ No root cell within B_max={table.grid.max_units} units, retrying uncapped")
            table = build_table(instance, model, capped=False)
            roots = table.frontier(1)
    except Exception as e:
        logger.error(f"❌ Budgeted DP failed on T={instance.horizon}: {e}")
        raise
    if not roots:
        raise InvariantViolation("root interval has no feasible budget")

    root = roots[0]
    deadlines = DeadlineAssignment.from_mapping(root.deadlines, instance.n)
    result = edf_schedule(instance, deadlines)
    if not result.met_all_deadlines:
        raise InvariantViolation(f"EDF missed a root-cell deadline: {result.first_violation}")
    require_valid(instance, result.schedule)
    value = objective(instance, result.schedule, model)
    grid = table.grid
    logger.debug(f"poly DP: {len(table.intervals)} intervals, {table.cells} frontier entries, "
                 f"root budget {root.budget} units of {grid.unit}")
    return PolyResult(
        deadlines=deadlines,
        schedule=result.schedule,
        objective=value,
        reported=report_value(value, model),
        root_units=root.budget,
        root_budget=grid.to_cost(root.budget),
        grid=grid,
        intervals=len(table.intervals),
        cells=table.cells,
    )
