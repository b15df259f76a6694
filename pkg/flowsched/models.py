"""
FLOWSCHED DATA MODELS
Jobs, instances, deadline assignments, schedules and the cost model
"""
import math
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

INF = math.inf

Time = Union[int, Fraction]
Deadline = Union[int, float]  # float only ever holds INF


@dataclass(frozen=True)
class Job:
    """A job with processing time p, release time r and weight w"""
    id: int
    p: int
    r: int
    w: int

    def __post_init__(self):
        for name in ("id", "p", "r", "w"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"job field {name} must be an integer, got {value!r}")
        if self.p < 1:
            raise ValueError(f"job {self.id}: processing time must be >= 1, got {self.p}")
        if self.r < 0:
            raise ValueError(f"job {self.id}: release time must be >= 0, got {self.r}")
        if self.w < 1:
            raise ValueError(f"job {self.id}: weight must be >= 1, got {self.w}")


@dataclass(frozen=True)
class Instance:
    """
    Scheduling instance. Jobs are kept sorted by (r, id); ids are the
    0-based positions in the source document. `machines[i][j]` is the
    processing time of job id j on machine i, INF when j cannot run there.
    """
    jobs: Tuple[Job, ...]
    machines: Optional[Tuple[Tuple[Deadline, ...], ...]] = None

    def __post_init__(self):
        if not self.jobs:
            raise ValueError("instance needs at least one job")
        ordered = tuple(sorted(self.jobs, key=lambda job: (job.r, job.id)))
        object.__setattr__(self, "jobs", ordered)
        if sorted(job.id for job in ordered) != list(range(len(ordered))):
            raise ValueError("job ids must be 0..n-1")

        if self.machines is None:
            return
        n = len(ordered)
        rows = tuple(tuple(row) for row in self.machines)
        if not rows:
            raise ValueError("machine matrix needs at least one row")
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError(f"machine {i} lists {len(row)} processing times, expected {n}")
            for j, value in enumerate(row):
                if value == INF:
                    continue
                if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                    raise ValueError(f"machines[{i}][{j}] must be a positive integer or inf, got {value!r}")
        for j in range(n):
            if all(rows[i][j] == INF for i in range(len(rows))):
                raise ValueError(f"job {j} has no machine with a finite processing time")
        object.__setattr__(self, "machines", rows)

    @classmethod
    def from_jobs(cls, triples: Iterable[Sequence[int]],
                  machines: Optional[Sequence[Sequence[Deadline]]] = None) -> "Instance":
        """Build from (p, r, w) triples listed in id order"""
        jobs = tuple(Job(id=k, p=p, r=r, w=w) for k, (p, r, w) in enumerate(triples))
        rows = tuple(tuple(row) for row in machines) if machines is not None else None
        return cls(jobs=jobs, machines=rows)

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def m(self) -> int:
        return len(self.machines) if self.machines is not None else 1

    @property
    def is_multi(self) -> bool:
        return self.machines is not None

    @cached_property
    def by_id(self) -> Tuple[Job, ...]:
        return tuple(sorted(self.jobs, key=lambda job: job.id))

    def job(self, job_id: int) -> Job:
        return self.by_id[job_id]

    def processing(self, machine: int, job_id: int) -> Deadline:
        if self.machines is not None:
            return self.machines[machine][job_id]
        return self.by_id[job_id].p if machine == 0 else INF

    def processing_matrix(self) -> Tuple[Tuple[Deadline, ...], ...]:
        """Machine matrix, or the single row of job processing times"""
        if self.machines is not None:
            return self.machines
        return (tuple(job.p for job in self.by_id),)

    @cached_property
    def p_max(self) -> int:
        if self.machines is None:
            return max(job.p for job in self.jobs)
        return max(value for row in self.machines for value in row if value != INF)

    @cached_property
    def horizon(self) -> int:
        """T: smallest power of two above max r + sum p, or max r + n*p_max with a machine matrix"""
        max_release = max(job.r for job in self.jobs)
        if self.is_multi:
            return max_release + self.n * self.p_max
        return 1 << (max_release + sum(job.p for job in self.jobs)).bit_length()

    def drop_job(self, job_id: int) -> "Instance":
        """Instance without one job, remaining ids renumbered in order"""
        if self.n == 1:
            raise ValueError("cannot drop the only job")
        kept = [job for job in self.by_id if job.id != job_id]
        machines = None
        if self.machines is not None:
            machines = [[row[job.id] for job in kept] for row in self.machines]
        return Instance.from_jobs([(job.p, job.r, job.w) for job in kept], machines)


@dataclass(frozen=True)
class DeadlineAssignment:
    """Per-job deadline indexed by job id; INF means no deadline before T"""
    d: Tuple[Deadline, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.d))
        for value in self.d:
            if value != INF and (isinstance(value, bool) or not isinstance(value, int) or value < 0):
                raise ValueError(f"deadline must be a non-negative integer or inf, got {value!r}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Deadline], n: int) -> "DeadlineAssignment":
        return cls(d=tuple(mapping.get(job_id, INF) for job_id in range(n)))

    def __getitem__(self, job_id: int) -> Deadline:
        return self.d[job_id]

    def __len__(self) -> int:
        return len(self.d)

    def finalized(self, horizon: int) -> Tuple[int, ...]:
        """INF entries rewritten to the horizon"""
        return tuple(horizon if value == INF else value for value in self.d)


@dataclass(frozen=True, order=True)
class Slot:
    """Machine `machine` processes `job` during [start, end)"""
    machine: int
    start: Fraction
    end: Fraction
    job: int

    def __post_init__(self):
        object.__setattr__(self, "start", Fraction(self.start))
        object.__setattr__(self, "end", Fraction(self.end))

    @property
    def length(self) -> Fraction:
        return self.end - self.start


@dataclass(frozen=True)
class Schedule:
    slots: Tuple[Slot, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(sorted(self.slots)))

    @cached_property
    def completion(self) -> Dict[int, Fraction]:
        """C_j: end of the last slot touching job j"""
        ends: Dict[int, Fraction] = {}
        for slot in self.slots:
            if slot.job not in ends or slot.end > ends[slot.job]:
                ends[slot.job] = slot.end
        return ends

    def for_job(self, job_id: int) -> List[Slot]:
        return [slot for slot in self.slots if slot.job == job_id]

    def flow_times(self, instance: Instance) -> Dict[int, Fraction]:
        return {job_id: end - instance.job(job_id).r for job_id, end in self.completion.items()}


class CostMode(str, Enum):
    SUM_WEIGHTED_FLOW = "sum"
    P_NORM = "p-norm"


@dataclass(frozen=True)
class CostModel:
    """Exponent p of the flow-time norm and the accuracy parameter epsilon"""
    p_norm: Fraction = Fraction(1)
    epsilon: Fraction = Fraction(1, 2)
    mode: CostMode = CostMode.SUM_WEIGHTED_FLOW

    def __post_init__(self):
        object.__setattr__(self, "p_norm", Fraction(self.p_norm))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "mode", CostMode(self.mode))
        if self.p_norm <= 0:
            raise ValueError(f"p_norm must be positive, got {self.p_norm}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def weighted_flow(cls, epsilon: Union[Fraction, int, str] = Fraction(1, 2)) -> "CostModel":
        return cls(Fraction(1), Fraction(epsilon), CostMode.SUM_WEIGHTED_FLOW)

    @classmethod
    def norm(cls, p: Union[Fraction, int, str], epsilon: Union[Fraction, int, str] = Fraction(1, 2)) -> "CostModel":
        return cls(Fraction(p), Fraction(epsilon), CostMode.P_NORM)

    @property
    def exponent(self) -> Fraction:
        """Exponent applied to each flow time"""
        return Fraction(1) if self.mode is CostMode.SUM_WEIGHTED_FLOW else self.p_norm
