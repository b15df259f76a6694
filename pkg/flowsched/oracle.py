"""
EXACT ORACLES
Memoized exhaustive search for optimal preemptive schedules on small
instances, the ground truth for every ratio check
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple, Union

from .config import ORACLE_MAX_HORIZON, ORACLE_MAX_SLOTS, ORACLE_MAX_STATES, ORACLE_MAX_WORK
from .costs import Cost, total_cost, weighted_cost, zero_cost
from .errors import OracleBudgetExceeded
from .models import INF, CostModel, Instance, Schedule, Slot
from .validation import objective

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleResult:
    objective: Cost
    schedule: Schedule
    states: int


def _merge(slots: List[Slot]) -> Tuple[Slot, ...]:
    merged: List[Slot] = []
    for slot in sorted(slots):
        last = merged[-1] if merged else None
        if last and last.machine == slot.machine and last.job == slot.job and last.end == slot.start:
            merged[-1] = Slot(slot.machine, last.start, slot.end, slot.job)
        else:
            merged.append(slot)
    return tuple(merged)


class _SingleSearch:
    """
    V(t, remaining) over unit slots. Jobs identical in (remaining, r, w) are
    interchangeable, so the memo key is the sorted multiset of those triples.
    Idling while a job is available never lowers a flow-time objective, so
    the search only idles to jump to the next release.
    """

    def __init__(self, instance: Instance, p: Fraction, max_states: int):
        self.jobs = instance.jobs
        self.p = p
        self.max_states = max_states
        self.memo: Dict[Tuple, Cost] = {}

    def key(self, t: int, remaining: Tuple[int, ...]) -> Tuple:
        return t, tuple(sorted((left, job.r, job.w) for left, job in zip(remaining, self.jobs) if left))

    def available(self, t: int, remaining: Tuple[int, ...]) -> List[int]:
        return [k for k, job in enumerate(self.jobs) if remaining[k] and job.r <= t]

    def step(self, t: int, remaining: Tuple[int, ...], k: int) -> Tuple[Cost, Tuple[int, ...]]:
        after = remaining[:k] + (remaining[k] - 1,) + remaining[k + 1:]
        job = self.jobs[k]
        gain = weighted_cost(job.w, t + 1 - job.r, self.p) if after[k] == 0 else zero_cost(self.p)
        return total_cost((gain, self.value(t + 1, after)), self.p), after

    def value(self, t: int, remaining: Tuple[int, ...]) -> Cost:
        if not any(remaining):
            return zero_cost(self.p)
        key = self.key(t, remaining)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        ready = self.available(t, remaining)
        if not ready:
            best = self.value(min(job.r for k, job in enumerate(self.jobs) if remaining[k]), remaining)
        else:
            best = min(self.step(t, remaining, k)[0] for k in ready)
        self.memo[key] = best
        if len(self.memo) > self.max_states:
            raise OracleBudgetExceeded(f"more than {self.max_states} memo states")
        return best


def oracle_single(instance: Instance, model: CostModel) -> OracleResult:
    """
    Minimum of sum w_j * F_j^p over preemptive single-machine schedules.
    With integer data an optimal schedule preempts only at integer times,
    so unit slots are exact. A one-row machine matrix overrides p.
    """
    if instance.is_multi and instance.m > 1:
        raise ValueError("oracle_single needs a single-machine instance")
    sizes = instance.processing_matrix()[0]
    work = sum(sizes[job.id] for job in instance.jobs)
    if work > ORACLE_MAX_WORK:
        raise OracleBudgetExceeded(f"total processing {work} > {ORACLE_MAX_WORK}")
    span = max(job.r for job in instance.jobs) + work
    if span > ORACLE_MAX_HORIZON:
        raise OracleBudgetExceeded(f"max r + total processing {span} > {ORACLE_MAX_HORIZON}")

    p = model.exponent
    search = _SingleSearch(instance, p, ORACLE_MAX_STATES)
    remaining = tuple(sizes[job.id] for job in instance.jobs)
    try:
        optimum = search.value(0, remaining)
    except RecursionError:
        raise OracleBudgetExceeded("search too deep")

    slots: List[Slot] = []
    t = 0
    while any(remaining):
        ready = search.available(t, remaining)
        if not ready:
            t = min(job.r for k, job in enumerate(instance.jobs) if remaining[k])
            continue
        target = search.value(t, remaining)
        for k in sorted(ready, key=lambda k: instance.jobs[k].id):
            cost, after = search.step(t, remaining, k)
            if cost == target:
                slots.append(Slot(0, t, t + 1, instance.jobs[k].id))
                remaining = after
                break
        t += 1

    schedule = Schedule(_merge(slots))
    value = objective(instance, schedule, model)
    logger.debug(f"oracle_single: optimum {optimum}, {len(search.memo)} states")
    return OracleResult(value, schedule, len(search.memo))


class _MultiSearch:
    """V(slot, processed fraction per job, machine lock per job) over delta slots"""

    def __init__(self, instance: Instance, p: Fraction, scale: int, slots: int,
                 migration: bool, max_states: int):
        self.jobs = instance.jobs
        self.matrix = instance.processing_matrix()
        self.p = p
        self.scale = scale
        self.slots = slots
        self.migration = migration
        self.max_states = max_states
        self.memo: Dict[Tuple, Optional[Cost]] = {}

    def choices(self, unit: int, done: Tuple[Fraction, ...],
                lock: Tuple[int, ...]) -> Iterator[Tuple[Optional[int], ...]]:
        """Per machine: a released unfinished job runnable there, or None; no job on two machines"""
        options = []
        for machine, row in enumerate(self.matrix):
            runnable: List[Optional[int]] = [None]
            for k, job in enumerate(self.jobs):
                if done[k] >= 1 or job.r * self.scale > unit or row[job.id] == INF:
                    continue
                if not self.migration and lock[k] not in (-1, machine):
                    continue
                runnable.append(k)
            options.append(runnable)
        for combo in itertools.product(*options):
            chosen = [k for k in combo if k is not None]
            if chosen and len(set(chosen)) == len(chosen):
                yield combo

    def step(self, unit: int, done: Tuple[Fraction, ...], lock: Tuple[int, ...],
             combo: Tuple[Optional[int], ...]) -> Tuple[Optional[Cost], List[Tuple[int, int, Fraction]], Tuple, Tuple]:
        after = list(done)
        locks = list(lock)
        gains = []
        runs = []
        for machine, k in enumerate(combo):
            if k is None:
                continue
            job = self.jobs[k]
            length = self.matrix[machine][job.id]
            share = Fraction(1, length * self.scale)
            start = Fraction(unit, self.scale)
            if done[k] + share >= 1:
                end = start + (1 - done[k]) * length
                after[k] = Fraction(1)
                gains.append(weighted_cost(job.w, end - job.r, self.p))
            else:
                end = start + Fraction(1, self.scale)
                after[k] = done[k] + share
            locks[k] = machine
            runs.append((machine, k, end))
        rest = self.value(unit + 1, tuple(after), tuple(locks))
        if rest is None:
            return None, runs, tuple(after), tuple(locks)
        return total_cost(gains + [rest], self.p), runs, tuple(after), tuple(locks)

    def value(self, unit: int, done: Tuple[Fraction, ...], lock: Tuple[int, ...]) -> Optional[Cost]:
        if all(value >= 1 for value in done):
            return zero_cost(self.p)
        if unit >= self.slots:
            return None
        key = (unit, done, lock)
        if key in self.memo:
            return self.memo[key]
        best: Optional[Cost] = None
        waiting = [job.r * self.scale for k, job in enumerate(self.jobs) if done[k] < 1]
        if min(waiting) > unit:
            best = self.value(min(waiting), done, lock)
        else:
            for combo in self.choices(unit, done, lock):
                cost = self.step(unit, done, lock, combo)[0]
                if cost is not None and (best is None or cost < best):
                    best = cost
        self.memo[key] = best
        if len(self.memo) > self.max_states:
            raise OracleBudgetExceeded(f"more than {self.max_states} memo states")
        return best


def oracle_multi(instance: Instance, model: CostModel, delta: Union[Fraction, int, str] = 1,
                 migration: bool = True) -> OracleResult:
    """
    Minimum of sum w_j * F_j^p over schedules that switch jobs only at
    multiples of delta within [0, T). A job may complete inside its last
    slot, so completion times are exact fractions.
    """
    delta = Fraction(delta)
    if delta <= 0 or (1 / delta).denominator != 1:
        raise ValueError(f"delta must be 1/k for a positive integer k, got {delta}")
    if instance.m > 2:
        raise OracleBudgetExceeded(f"{instance.m} machines > 2")
    scale = delta.denominator
    slots = instance.horizon * scale
    if slots > ORACLE_MAX_SLOTS:
        raise OracleBudgetExceeded(f"{slots} delta slots > {ORACLE_MAX_SLOTS}")

    search = _MultiSearch(instance, model.exponent, scale, slots, migration, ORACLE_MAX_STATES)
    done = tuple(Fraction(0) for _ in instance.jobs)
    lock = tuple(-1 for _ in instance.jobs)
    try:
        optimum = search.value(0, done, lock)
    except RecursionError:
        raise OracleBudgetExceeded("search too deep")
    if optimum is None:
        raise OracleBudgetExceeded(f"no schedule finishes within T = {instance.horizon}")

    placed: List[Slot] = []
    unit = 0
    while not all(value >= 1 for value in done):
        waiting = [job.r * scale for k, job in enumerate(instance.jobs) if done[k] < 1]
        if min(waiting) > unit:
            unit = min(waiting)
            continue
        target = search.value(unit, done, lock)
        for combo in search.choices(unit, done, lock):
            cost, runs, after, locks = search.step(unit, done, lock, combo)
            if cost is not None and cost == target:
                for machine, k, end in runs:
                    placed.append(Slot(machine, Fraction(unit, scale), end, instance.jobs[k].id))
                done, lock = after, locks
                break
        unit += 1

    schedule = Schedule(_merge(placed))
    value = objective(instance, schedule, model)
    logger.debug(f"oracle_multi: optimum {optimum}, {len(search.memo)} states, migration={migration}")
    return OracleResult(value, schedule, len(search.memo))
