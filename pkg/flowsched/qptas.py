"""
QUASI-POLYNOMIAL SCHEME FOR UNRELATED MACHINES
Jobs are placed from the last release to the first. A cell for job j holds a
load vector: how many delta positions of each interval have exactly a given
set of machines busy with jobs j..n. Earlier jobs only ever see that load
through the intervals of D(j - 1), so cells are stored at that granularity.
Job j is stacked onto the load of job j+1 through a guess vector y(I, S, i).

Cells are searched best first. The key of a cell is its charged cost plus a
lower bound on every job still to be placed, so the first complete cell
taken from the queue is a cheapest cell of the whole table.
"""
import bisect
import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .config import QPTAS_MAX_COMPLEXITY, QPTAS_MAX_MACHINES, QPTAS_STATE_BUDGET
from .costs import Cost, certified_le, total_cost, weighted_cost, zero_cost
from .deadlines import DeadlineSets, DeltaGrid, build_deadlines
from .errors import InvariantViolation, StateBudgetExceeded
from .models import INF, CostModel, Instance, Job, Schedule, Slot
from .validation import objective, report_value

logger = logging.getLogger(__name__)

LoadKey = Tuple[int, int]          # (interval, busy machine set)
GuessKey = Tuple[int, int, int]    # (interval, busy machine set, machine of the job)
Counts = Tuple[int, ...]           # delta positions used per machine


@dataclass(frozen=True)
class LoadVector:
    entries: Tuple[Tuple[LoadKey, int], ...] = ()

    @classmethod
    def from_counts(cls, counts: Mapping[LoadKey, int]) -> "LoadVector":
        return cls(tuple(sorted((key, value) for key, value in counts.items() if value)))

    def as_dict(self) -> Dict[LoadKey, int]:
        return dict(self.entries)

    def busy(self, interval: int) -> int:
        return sum(value for (index, _), value in self.entries if index == interval)


@dataclass(frozen=True)
class GuessVector:
    entries: Tuple[Tuple[GuessKey, int], ...] = ()


@dataclass(frozen=True)
class QptasCell:
    """Jobs pos..n-1 placed; `guess` belongs to job pos, `child` is the cell of job pos + 1"""
    pos: int
    load: LoadVector
    cost: Cost
    guess: GuessVector
    child: Optional["QptasCell"]


@dataclass(frozen=True)
class QptasResult:
    schedule: Schedule
    objective: Cost
    reported: Cost
    charged: Cost
    states: int
    checks: int
    grid: DeltaGrid
    sets: DeadlineSets
    migration: bool


@dataclass(frozen=True)
class _Position:
    job: Job
    intervals: Tuple[Tuple[int, int], ...]
    sizes: Tuple[int, ...]
    mapping: Optional[Tuple[int, ...]]     # interval of D(pos - 1) holding each interval
    parent_sizes: Tuple[int, ...]
    totals: Tuple[Counts, ...]             # minimal per-machine slot counts
    unfinished: Tuple[Counts, ...]         # counts strictly below some minimal total
    rates: Tuple[Optional[Fraction], ...]  # share of the job done by one position per machine
    charges: Tuple[Cost, ...]              # charge when the last positive interval is k


def _compositions(total: int, caps: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """Ways to write total as len(caps) parts with part k <= caps[k]"""
    if not caps:
        if total == 0:
            yield ()
        return
    room = sum(caps[1:])
    for first in range(max(0, total - room), min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first,) + rest


def _minimal_totals(needs: Mapping[int, int], migration: bool) -> List[Dict[int, int]]:
    """
    Slot counts per machine that complete the job, where removing any single
    slot leaves it unfinished. `needs[i]` is p_ij / delta.
    """
    if not migration:
        return [{i: need} for i, need in sorted(needs.items())]
    machines = sorted(needs)
    found: List[Dict[int, int]] = []

    def extend(index: int, chosen: Dict[int, int], done: Fraction) -> None:
        if done >= 1:
            if all(done - Fraction(1, needs[i]) < 1 for i, k in chosen.items() if k):
                found.append({i: k for i, k in chosen.items() if k})
            return
        if index == len(machines):
            return
        i = machines[index]
        for k in range(needs[i] + 1):
            chosen[i] = k
            extend(index + 1, chosen, done + Fraction(k, needs[i]))
        del chosen[i]

    extend(0, {}, Fraction(0))
    return found


def _guess_estimate(sizes: Sequence[int], totals: Sequence[Counts]) -> int:
    """Guess vectors of one job against an empty load, machines counted independently"""
    most = max(max(total) for total in totals)
    ways = [1] + [0] * most
    for size in sizes:
        step = [0] * (most + 1)
        for used, count in enumerate(ways):
            if count:
                for extra in range(min(size, most - used) + 1):
                    step[used + extra] += count
        ways = step
    return sum(math.prod(ways[k] for k in total) for total in totals)


def _parent_map(sets: DeadlineSets, pos: int) -> List[int]:
    """Interval of D(pos) containing each interval of D(pos + 1)"""
    parents = sets.intervals(pos)
    starts = [lo for lo, _ in parents]
    mapping = []
    for lo, hi in sets.intervals(pos + 1):
        k = bisect.bisect_right(starts, lo) - 1
        if k < 0 or hi > parents[k][1]:
            raise InvariantViolation(f"interval [{lo}, {hi}) of job position {pos + 1} "
                                     f"does not subdivide D at position {pos}")
        mapping.append(k)
    return mapping


def _coarsen(load: LoadVector, mapping: Sequence[int], sizes: Sequence[int]) -> Dict[LoadKey, int]:
    residual: Dict[LoadKey, int] = {}
    for (interval, machines), value in load.entries:
        key = (mapping[interval], machines)
        residual[key] = residual.get(key, 0) + value
    if sum(residual.values()) != sum(value for _, value in load.entries):
        raise InvariantViolation("coarsening lost load")
    for interval, size in enumerate(sizes):
        if sum(v for (k, _), v in residual.items() if k == interval) > size:
            raise InvariantViolation(f"coarsened load exceeds interval {interval} of size {size}")
    return residual


def _interval_options(work: Sequence[Tuple[int, int]], free: Dict[int, int]) -> Iterator[Tuple[Tuple[int, int, int], ...]]:
    """(X, i, count) placements of y slots on machine i into positions whose busy set X excludes i"""
    if not work:
        yield ()
        return
    (machine, slots), rest = work[0], work[1:]
    classes = [busy for busy in sorted(free) if not busy >> machine & 1 and free[busy] > 0]
    for parts in _compositions(slots, [free[busy] for busy in classes]):
        remaining = dict(free)
        placed = []
        for busy, count in zip(classes, parts):
            if count:
                remaining[busy] -= count
                placed.append((busy, machine, count))
        for tail in _interval_options(rest, remaining):
            yield tuple(placed) + tail


def _check_identities(residual: Mapping[LoadKey, int], guess: GuessVector,
                      load: LoadVector, sizes: Sequence[int]) -> None:
    """L' = L - y(S, i in S) + y(S + i, i not in S), L >= 0, and capacity per interval"""
    values = load.as_dict()
    own: Dict[LoadKey, int] = {}
    added: Dict[LoadKey, int] = {}
    for (interval, machines, machine), count in guess.entries:
        own[(interval, machines)] = own.get((interval, machines), 0) + count
        below = machines & ~(1 << machine)
        if below:
            added[(interval, below)] = added.get((interval, below), 0) + count
    for key in set(values) | set(residual) | set(own):
        value = values.get(key, 0)
        if value < 0 or value < own.get(key, 0):
            raise InvariantViolation(f"load {key} = {value} below its own guesses {own.get(key, 0)}")
        if value - own.get(key, 0) + added.get(key, 0) != residual.get(key, 0):
            raise InvariantViolation(f"residual identity fails at {key}")
    for interval, size in enumerate(sizes):
        if load.busy(interval) > size:
            raise InvariantViolation(f"load exceeds interval {interval} of size {size}")


def _greedy_upper_bound(instance: Instance, matrix, sets: DeadlineSets, p: Fraction) -> Cost:
    """Charged cost of placing each job, in release order, as early as possible on its fastest machine"""
    scale = sets.grid.scale
    end = sets.horizon * scale
    busy = [set() for _ in matrix]
    charges = []
    for pos, job in enumerate(instance.jobs):
        best = None
        for machine, row in enumerate(matrix):
            if row[job.id] == INF:
                continue
            need = row[job.id] * scale
            chosen = []
            unit = job.r * scale
            while len(chosen) < need and unit < end:
                if unit not in busy[machine]:
                    chosen.append(unit)
                unit += 1
            if len(chosen) == need and (best is None or chosen[-1] < best[2][-1]):
                best = (chosen[-1], machine, chosen)
        if best is None:
            raise InvariantViolation(f"job {job.id} does not fit before T = {sets.horizon}")
        last, machine, chosen = best
        busy[machine].update(chosen)
        row = sets.points[pos]
        due = row[bisect.bisect_right(row, last)]
        charges.append(weighted_cost(job.w, Fraction(due, scale) - job.r, p))
    return total_cost(charges, p)


def _positions(instance: Instance, sets: DeadlineSets, p: Fraction, migration: bool,
               budget: int) -> List[_Position]:
    """Per-position tables; refuses jobs whose guess vectors alone would outgrow the budget"""
    matrix = instance.processing_matrix()
    scale = sets.grid.scale
    m = len(matrix)
    positions = []
    for pos, job in enumerate(instance.jobs):
        intervals = sets.intervals(pos)
        sizes = tuple(hi - lo for lo, hi in intervals)
        needs = {i: int(row[job.id]) * scale for i, row in enumerate(matrix) if row[job.id] != INF}
        span = math.prod(need + 1 for need in needs.values()) if migration else sum(needs.values())
        if span > budget:
            raise StateBudgetExceeded(f"job {job.id}: {span} slot totals to try, budget {budget}")
        totals = tuple(tuple(counts.get(i, 0) for i in range(m)) for counts in _minimal_totals(needs, migration))
        estimate = _guess_estimate(sizes, totals)
        if estimate > budget:
            raise StateBudgetExceeded(f"job {job.id}: about {estimate} guess vectors per cell, budget {budget}")
        below = {vector for total in totals for vector in itertools.product(*(range(k + 1) for k in total))}
        mapping = parent_sizes = None
        if pos > 0:
            mapping = tuple(_parent_map(sets, pos - 1))
            parent_sizes = tuple(hi - lo for lo, hi in sets.intervals(pos - 1))
        positions.append(_Position(
            job=job,
            intervals=intervals,
            sizes=sizes,
            mapping=mapping,
            parent_sizes=parent_sizes or (),
            totals=totals,
            unfinished=tuple(sorted(below - set(totals))),
            rates=tuple(Fraction(1, int(row[job.id]) * scale) if row[job.id] != INF else None for row in matrix),
            charges=tuple(weighted_cost(job.w, Fraction(hi, scale) - job.r, p) for _, hi in intervals),
        ))
    return positions


class _Expansion:
    """Guess vectors of job `pos` on top of one cell, produced one last interval at a time"""

    def __init__(self, search: "_Search", cell: QptasCell):
        self.search = search
        self.cell = cell
        self.pos = cell.pos - 1
        self.position = search.positions[self.pos]
        self.residual = cell.load.as_dict()
        self.bound = search.rest(self.pos, cell.load, self.pos)
        zero = tuple(0 for _ in self.position.rates)
        # (counts, placements per (parent interval, busy, machine)) -> fine guess entries
        self.partial: Dict[Tuple, Tuple] = {(zero, ()): ()}
        self.next = 0

    def step(self) -> None:
        k = self.next
        for placed in self._extend(k, final=True).values():
            self.search.offer(self._cell(placed, k))
        self.partial = self._extend(k, final=False)
        self.next = k + 1
        self.search.push_group(self)

    def _extend(self, k: int, final: bool) -> Dict[Tuple, Tuple]:
        """
        Place slots of the job in interval k. With `final` the job must reach
        a minimal total there, otherwise it must stay unfinished.
        """
        position = self.position
        free = {busy: value for (index, busy), value in self.residual.items() if index == k}
        free[0] = position.sizes[k] - sum(free.values())
        parent = position.mapping[k] if position.mapping is not None else k
        targets = position.totals if final else position.unfinished
        out: Dict[Tuple, Tuple] = {}
        for (counts, moved), placed in self.partial.items():
            for target in targets:
                if any(t < c for t, c in zip(target, counts)):
                    continue
                work = [(i, t - c) for i, (t, c) in enumerate(zip(target, counts)) if t > c]
                if final and not work:
                    continue
                for option in _interval_options(work, free):
                    merged = dict(moved)
                    fine = list(placed)
                    for busy, machine, count in option:
                        merged[(parent, busy, machine)] = merged.get((parent, busy, machine), 0) + count
                        fine.append(((k, busy | 1 << machine, machine), count))
                    key = (target, tuple(sorted(merged.items())))
                    if key not in out:
                        out[key] = tuple(fine)
                        if len(out) > self.search.budget:
                            raise StateBudgetExceeded(f"job {position.job.id}: more than "
                                                      f"{self.search.budget} partial guesses")
        return out

    def _cell(self, placed: Tuple, k: int) -> QptasCell:
        position = self.position
        guess = GuessVector(tuple(sorted(placed)))
        counts = dict(self.residual)
        for (interval, stacked, machine), count in placed:
            counts[(interval, stacked)] = counts.get((interval, stacked), 0) + count
            below = stacked & ~(1 << machine)
            if below:
                counts[(interval, below)] -= count
        load = LoadVector.from_counts(counts)
        _check_identities(self.residual, guess, load, position.sizes)
        self.search.checks += 1
        if position.mapping is None:
            load = LoadVector()
        else:
            load = LoadVector.from_counts(_coarsen(load, position.mapping, position.parent_sizes))
        cost = total_cost((position.charges[k], self.cell.cost), self.search.p)
        return QptasCell(self.pos, load, cost, guess, self.cell)


class _Search:
    """Best-first search over QPTAS cells, keyed by (charged cost + lower bound, position)"""

    def __init__(self, instance: Instance, sets: DeadlineSets, positions: List[_Position],
                 p: Fraction, migration: bool, budget: int):
        self.instance = instance
        self.sets = sets
        self.positions = positions
        self.p = p
        self.migration = migration
        self.budget = budget
        self.scale = sets.grid.scale
        self.upper = _greedy_upper_bound(instance, instance.processing_matrix(), sets, p)
        self.best: Dict[Tuple, QptasCell] = {}
        self.queue: List[Tuple] = []
        self.order = itertools.count()
        self.checks = 0

    def run(self) -> QptasCell:
        n = self.instance.n
        self.offer(QptasCell(n, LoadVector(), zero_cost(self.p), GuessVector(), None))
        while self.queue:
            item = heapq.heappop(self.queue)[-1]
            if isinstance(item, _Expansion):
                item.step()
                continue
            if self.best.get((item.pos, item.load.entries)) is not item:
                continue
            if item.pos == 0:
                return item
            self.push_group(_Expansion(self, item))
        raise InvariantViolation("QPTAS queue ran dry before every job was placed")

    def offer(self, cell: QptasCell) -> None:
        key = (cell.pos, cell.load.entries)
        current = self.best.get(key)
        if current is not None and not cell.cost < current.cost:
            return
        bound = self.rest(cell.pos, cell.load, cell.pos - 1)
        if bound is None:
            return
        priority = total_cost((cell.cost, bound), self.p)
        if not certified_le(priority, self.upper):
            return
        if current is None and len(self.best) >= self.budget:
            raise StateBudgetExceeded(f"more than {self.budget} QPTAS states")
        self.best[key] = cell
        heapq.heappush(self.queue, (priority, cell.pos, next(self.order), cell))

    def push_group(self, expansion: _Expansion) -> None:
        k = expansion.next
        if expansion.bound is None or not expansion.partial or k >= len(expansion.position.intervals):
            return
        priority = total_cost((expansion.cell.cost, expansion.position.charges[k], expansion.bound), self.p)
        if certified_le(priority, self.upper):
            heapq.heappush(self.queue, (priority, expansion.pos, next(self.order), expansion))

    def rest(self, upto: int, load: LoadVector, granularity: int) -> Optional[Cost]:
        """
        Lower bound on the charges of jobs 0..upto-1 when `load` is spread over
        the intervals of D(granularity): each job alone, with the free
        positions of every interval at its front. None if some job cannot finish.
        """
        if upto == 0:
            return zero_cost(self.p)
        intervals = self.sets.intervals(granularity)
        busy: List[Dict[int, int]] = [{} for _ in intervals]
        for (interval, machines), value in load.entries:
            busy[interval][machines] = value
        blocks = [(0, intervals[0][0], {0: intervals[0][0]})]
        for (lo, hi), counts in zip(intervals, busy):
            free = dict(counts)
            free[0] = hi - lo - sum(counts.values())
            blocks.append((lo, hi, free))
        terms = []
        for pos in range(upto):
            unit = self._earliest_last_unit(self.positions[pos], blocks)
            if unit is None:
                return None
            job = self.positions[pos].job
            row = self.sets.points[pos]
            due = row[bisect.bisect_right(row, unit)]
            terms.append(weighted_cost(job.w, Fraction(due, self.scale) - job.r, self.p))
        return total_cost(terms, self.p)

    def _earliest_last_unit(self, position: _Position, blocks) -> Optional[int]:
        start = position.job.r * self.scale
        machines: List[Optional[int]] = [None] if self.migration else [
            i for i, rate in enumerate(position.rates) if rate]
        found = [unit for unit in (self._finish(position.rates, machine, start, blocks) for machine in machines)
                 if unit is not None]
        return min(found, default=None)

    @staticmethod
    def _finish(rates, machine: Optional[int], start: int, blocks) -> Optional[int]:
        """Position of the last slot; `machine` None lets every position use its fastest free machine"""
        def rate_of(busy: int) -> Fraction:
            if machine is None:
                return max((rate for i, rate in enumerate(rates) if rate and not busy >> i & 1), default=Fraction(0))
            return rates[machine] if not busy >> machine & 1 else Fraction(0)

        done = Fraction(0)
        for lo, hi, counts in blocks:
            cursor = max(lo, start)
            room = hi - cursor
            if room <= 0:
                continue
            for rate, count in sorted(((rate_of(busy), count) for busy, count in counts.items()), reverse=True):
                if not rate or room <= 0:
                    break
                take = min(count, room)
                if take <= 0:
                    continue
                if rate * take >= 1 - done:
                    return cursor + math.ceil((1 - done) / rate) - 1
                done += rate * take
                cursor += take
                room -= take
        return None


def materialize(instance: Instance, sets: DeadlineSets, chain: Sequence[QptasCell]) -> Schedule:
    """
    Turn the chosen cells into slots. Later jobs are placed first; each guess
    entry y(I, S, i) takes the leftmost positions of I whose set of machines
    busy with later jobs is exactly S minus i. The final slot of each job is
    cut at its exact completion.
    """
    scale = sets.grid.scale
    matrix = instance.processing_matrix()
    occupied: Dict[int, Dict[int, int]] = {}
    slots: List[Slot] = []
    for pos in reversed(range(instance.n)):
        job = instance.jobs[pos]
        intervals = sets.intervals(pos)
        mine = set()
        placements: List[Tuple[int, int]] = []
        for (interval, machines, machine), count in chain[pos].guess.entries:
            wanted = machines & ~(1 << machine)
            lo, hi = intervals[interval]
            picked = 0
            for unit in range(lo, hi):
                if picked == count:
                    break
                if unit in mine:
                    continue
                running = occupied.get(unit, {})
                if sum(1 << k for k in running) != wanted:
                    continue
                occupied.setdefault(unit, {})[machine] = job.id
                mine.add(unit)
                placements.append((unit, machine))
                picked += 1
            if picked < count:
                raise InvariantViolation(f"job {job.id}: only {picked} of {count} positions "
                                         f"with busy set {wanted} in [{lo}, {hi})")

        done = Fraction(0)
        for number, (unit, machine) in enumerate(sorted(placements)):
            p = matrix[machine][job.id]
            share = Fraction(1, p * scale)
            start = Fraction(unit, scale)
            if done + share >= 1:
                slots.append(Slot(machine, start, start + (1 - done) * p, job.id))
                done = Fraction(1)
                if number != len(placements) - 1:
                    raise InvariantViolation(f"job {job.id} finished before its last guessed position")
                break
            slots.append(Slot(machine, start, start + sets.grid.delta, job.id))
            done += share
        if done < 1:
            raise InvariantViolation(f"job {job.id} left unfinished by its guess vector")

    merged: List[Slot] = []
    for slot in sorted(slots):
        last = merged[-1] if merged else None
        if last and last.machine == slot.machine and last.job == slot.job and last.end == slot.start:
            merged[-1] = Slot(slot.machine, last.start, slot.end, slot.job)
        else:
            merged.append(slot)
    return Schedule(tuple(merged))


def solve_qptas(instance: Instance, model: CostModel, migration: bool = True,
                delta: Optional[Union[Fraction, int, str]] = None,
                state_budget: Optional[int] = None,
                max_complexity: Optional[int] = None) -> QptasResult:
    """
    Sum of w_j * F_j^p on unrelated machines within (1 + eps)^(3p) of optimal.
    Jobs whose guess vectors on an empty load already exceed `state_budget`
    are refused before any search; the search itself stops once it holds
    more than `state_budget` cells.
    """
    if instance.m > QPTAS_MAX_MACHINES:
        raise ValueError(f"the QPTAS supports at most {QPTAS_MAX_MACHINES} machines, got {instance.m}")
    grid = DeltaGrid.for_instance(instance, model.epsilon, delta)
    complexity = instance.n * max(1.0, math.log2(instance.horizon)) / float(grid.epsilon)
    cap = QPTAS_MAX_COMPLEXITY if max_complexity is None else max_complexity
    if complexity > cap:
        raise StateBudgetExceeded(f"n * log2(T) / eps = {complexity:.1f} exceeds {cap}")
    budget = QPTAS_STATE_BUDGET if state_budget is None else state_budget
    sets = build_deadlines(instance, model.epsilon, grid)
    p = model.exponent

    try:
        positions = _positions(instance, sets, p, migration, budget)
        search = _Search(instance, sets, positions, p, migration, budget)
        best = search.run()
    except StateBudgetExceeded as e:
        logger.error(f"❌ QPTAS state budget exhausted: {e}")
        raise

    chain = []
    cell = best
    while cell.pos < instance.n:
        chain.append(cell)
        cell = cell.child
    schedule = materialize(instance, sets, chain)
    value = objective(instance, schedule, model)
    logger.debug(f"QPTAS: {len(search.best)} states, {search.checks} identity checks, "
                 f"charged {best.cost}, objective {value}")
    return QptasResult(schedule, value, report_value(value, model), best.cost, len(search.best),
                       search.checks, grid, sets, migration)
