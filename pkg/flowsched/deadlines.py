"""
DELTA GRID AND HIERARCHICAL DEADLINE SETS
Candidate deadlines D(j) for the unrelated-machine DP, stored as integer
multiples of delta
"""
import math
import logging
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal, localcontext
from fractions import Fraction
from typing import List, Optional, Set, Tuple, Union

from .config import DECIMAL_PRECISION
from .models import Instance

logger = logging.getLogger(__name__)

# |D(j)| <= DEADLINE_SET_CONSTANT * max(1, log2 T) / eps on every instance
DEADLINE_SET_CONSTANT = 16


@dataclass(frozen=True)
class DeltaGrid:
    """epsilon already rounded down to 1/k; delta = 1/scale"""
    epsilon: Fraction
    delta: Fraction

    @classmethod
    def for_instance(cls, instance: Instance, epsilon: Union[Fraction, int, str],
                     delta: Optional[Union[Fraction, int, str]] = None) -> "DeltaGrid":
        epsilon = Fraction(epsilon)
        if epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        effective = Fraction(1, math.ceil(1 / epsilon))
        if effective != epsilon:
            logger.info(f"epsilon {epsilon} rounded down to {effective}")
        if delta is None:
            delta = effective / instance.n ** instance.m
        delta = Fraction(delta)
        if delta <= 0 or (1 / delta).denominator != 1:
            raise ValueError(f"delta must be 1/k for a positive integer k, got {delta}")
        if delta > effective:
            raise ValueError(f"delta {delta} must not exceed epsilon {effective}")
        return cls(effective, delta)

    @property
    def scale(self) -> int:
        return self.delta.denominator

    def to_units(self, time: int) -> int:
        return time * self.scale

    def to_time(self, units: int) -> Fraction:
        return Fraction(units, self.scale)


@dataclass(frozen=True)
class DeadlineSets:
    """
    `points[pos]` is D of the job at position `pos` of the release order,
    sorted, in delta units.
    """
    grid: DeltaGrid
    horizon: int
    order: Tuple[int, ...]
    points: Tuple[Tuple[int, ...], ...]

    def intervals(self, pos: int) -> Tuple[Tuple[int, int], ...]:
        row = self.points[pos]
        return tuple(zip(row, row[1:]))

    def for_job(self, job_id: int) -> Tuple[int, ...]:
        return self.points[self.order.index(job_id)]

    def cardinality_bound(self) -> Fraction:
        log_t = max(1.0, math.log2(self.horizon)) if self.horizon > 1 else 1.0
        return Fraction(DEADLINE_SET_CONSTANT) * Fraction(log_t) / self.grid.epsilon


def _refine(points: Set[Decimal], release: Decimal, k: int) -> None:
    # insert r + sqrt((d - r)(d' - r)) until (d' - r) <= (1 + 1/k)(d - r) for d >= r + 1
    while True:
        ordered = sorted(points)
        added = False
        for low, high in zip(ordered, ordered[1:]):
            if low >= release + 1 and k * (high - release) > (k + 1) * (low - release):
                points.add(release + ((low - release) * (high - release)).sqrt())
                added = True
        if not added:
            return


def build_deadlines(instance: Instance, epsilon: Union[Fraction, int, str],
                    grid: Optional[DeltaGrid] = None) -> DeadlineSets:
    """
    D(first) starts from {r, r+1, T}; every later job keeps the previous
    points at or after its release and adds r and r+1. Geometric means are
    inserted until consecutive flow ratios are at most 1 + eps, then each
    point is replaced by its delta floor and ceiling.
    """
    grid = grid or DeltaGrid.for_instance(instance, epsilon)
    k = grid.epsilon.denominator
    horizon = instance.horizon
    scale = Decimal(grid.scale)

    raw: List[Set[Decimal]] = []
    with localcontext(Context(prec=DECIMAL_PRECISION)):
        previous: Optional[Set[Decimal]] = None
        for job in instance.jobs:
            release = Decimal(job.r)
            current = {release, release + 1}
            if previous is None:
                current.add(Decimal(horizon))
            else:
                current.update(point for point in previous if point >= release)
            _refine(current, release, k)
            raw.append(current)
            previous = current

        points = []
        for current in raw:
            discrete = set()
            for point in current:
                scaled = point * scale
                discrete.add(int(scaled.to_integral_value(rounding=ROUND_FLOOR)))
                discrete.add(int(scaled.to_integral_value(rounding=ROUND_CEILING)))
            points.append(tuple(sorted(discrete)))

    sets = DeadlineSets(grid, horizon, tuple(job.id for job in instance.jobs), tuple(points))
    logger.debug(f"deadline sets: max |D(j)| = {max(len(row) for row in points)}, delta = {grid.delta}")
    return sets
