"""
Shared fixtures and brute-force reference helpers for the flowsched tests
"""
import itertools
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import hypothesis.strategies as st
import pytest
from hypothesis import settings

from flowsched.costs import total_cost, weighted_cost
from flowsched.lawler_moore import LmProblem
from flowsched.models import CostModel, Instance

settings.register_profile("flowsched", deadline=None, max_examples=60)
settings.load_profile("flowsched")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance sweeps")


@st.composite
def single_instances(draw, max_n: int = 4, max_p: int = 3, max_r: int = 4, max_w: int = 4):
    n = draw(st.integers(1, max_n))
    triples = [(draw(st.integers(1, max_p)), draw(st.integers(0, max_r)), draw(st.integers(1, max_w)))
               for _ in range(n)]
    return Instance.from_jobs(triples)


@st.composite
def lm_problems(draw, max_n: int = 6, max_p: int = 4, max_r: int = 6, max_c: int = 9):
    n = draw(st.integers(1, max_n))
    jobs = [(draw(st.integers(1, max_p)), draw(st.integers(0, max_r)), draw(st.integers(0, max_c)))
            for _ in range(n)]
    due = draw(st.integers(0, max_r + max_p * 2))
    return LmProblem.of(jobs, due)


def block_start(problem: LmProblem, chosen: Sequence[int], start: int = 0) -> Optional[int]:
    """Start of `chosen` packed right up to the due date in release order, None if some release is violated"""
    end = problem.due
    for k in sorted(chosen, key=lambda k: (max(problem.jobs[k].r, start), k), reverse=True):
        end -= problem.jobs[k].p
        if end < max(problem.jobs[k].r, start):
            return None
    return end


def brute_lm_penalty(problem: LmProblem, start: int) -> Fraction:
    n = len(problem.jobs)
    best = None
    for size in range(n + 1):
        for chosen in itertools.combinations(range(n), size):
            if block_start(problem, chosen, start) is None:
                continue
            penalty = sum(problem.jobs[k].c for k in range(n) if k not in chosen)
            best = penalty if best is None else min(best, penalty)
    return best


def brute_latest_start(problem: LmProblem, budget: int) -> Optional[int]:
    n = len(problem.jobs)
    best = None
    for size in range(n + 1):
        for chosen in itertools.combinations(range(n), size):
            if sum(problem.jobs[k].c for k in range(n) if k not in chosen) > budget:
                continue
            begin = block_start(problem, chosen)
            if begin is not None and (best is None or begin > best):
                best = begin
    return best


def priority_cost(instance: Instance, order: Sequence[int], model: CostModel):
    """Preemptive fixed-priority schedule (earlier in `order` wins) on unit steps"""
    rank = {job_id: k for k, job_id in enumerate(order)}
    remaining = {job.id: job.p for job in instance.jobs}
    costs = []
    t = 0
    while remaining:
        ready = [job for job in instance.jobs if job.id in remaining and job.r <= t]
        if not ready:
            t = min(instance.job(job_id).r for job_id in remaining)
            continue
        job = min(ready, key=lambda job: rank[job.id])
        remaining[job.id] -= 1
        t += 1
        if remaining[job.id] == 0:
            del remaining[job.id]
            costs.append(weighted_cost(job.w, t - job.r, model.exponent))
    return total_cost(costs, model.exponent)


def best_priority_cost(instance: Instance, model: CostModel):
    return min(priority_cost(instance, order, model)
               for order in itertools.permutations(range(instance.n)))


def exhaustive_single(instance: Instance, model: CostModel):
    """Every unit-slot choice sequence without memoization; tiny instances only"""
    jobs = instance.jobs

    def search(t: int, remaining: Tuple[int, ...]):
        if not any(remaining):
            return Fraction(0)
        ready = [k for k, job in enumerate(jobs) if remaining[k] and job.r <= t]
        if not ready:
            return search(min(job.r for k, job in enumerate(jobs) if remaining[k]), remaining)
        best = None
        for k in ready:
            after = remaining[:k] + (remaining[k] - 1,) + remaining[k + 1:]
            gain = weighted_cost(jobs[k].w, t + 1 - jobs[k].r, model.exponent) if after[k] == 0 else 0
            value = total_cost((gain, search(t + 1, after)), model.exponent)
            best = value if best is None else min(best, value)
        return best

    return search(0, tuple(job.p for job in jobs))


@pytest.fixture
def two_job_instance() -> Instance:
    return Instance.from_jobs([(2, 0, 1), (1, 0, 10)])


@pytest.fixture
def three_job_instance() -> Instance:
    return Instance.from_jobs([(1, 0, 1), (2, 0, 1), (1, 1, 5)])


@pytest.fixture
def weighted_flow() -> CostModel:
    return CostModel.weighted_flow()
