"""
Lawler-Moore late-job selection and the latest-start profile
"""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import block_start, brute_latest_start, brute_lm_penalty, lm_problems
from flowsched.lawler_moore import LmProblem, LmProfile, lawler_moore, lm_latest_start


def test_capacity_keeps_the_expensive_job():
    problem = LmProblem.of([(2, 0, 5), (2, 0, 3)], due=3)
    solution = lawler_moore(problem, 0)
    assert solution.penalty == 3
    assert solution.on_time == (0,)
    assert solution.late == (1,)
    assert solution.start == 1
    assert [(slot.start, slot.end, slot.job) for slot in solution.slots] == [(1, 3, 0)]


def test_everything_fits():
    problem = LmProblem.of([(1, 0, 4), (2, 1, 2), (1, 0, 9)], due=6)
    assert lawler_moore(problem, 1).penalty == 0


def test_zero_room_makes_the_job_late():
    problem = LmProblem.of([(1, 3, 7)], due=3)
    solution = lawler_moore(problem, 0)
    assert solution.penalty == 7
    assert solution.slots == ()
    assert solution.start == 3


def test_fractional_costs_are_kept_exact():
    problem = LmProblem.of([(2, 0, Fraction(5, 2)), (2, 0, Fraction(7, 3))], due=3)
    assert lawler_moore(problem, 0).penalty == Fraction(7, 3)


def test_start_after_due_date_is_rejected():
    with pytest.raises(ValueError):
        lawler_moore(LmProblem.of([(1, 0, 1)], due=2), 3)


@given(lm_problems(max_n=7), st.integers(0, 6))
def test_penalty_matches_subset_enumeration(problem, start):
    start = min(start, problem.due)
    solution = lawler_moore(problem, start)
    assert solution.penalty == brute_lm_penalty(problem, start)
    assert set(solution.on_time) | set(solution.late) == set(range(len(problem.jobs)))
    assert block_start(problem, solution.on_time, start) is not None


@given(lm_problems(max_n=6))
def test_penalty_does_not_grow_when_start_moves_earlier(problem):
    penalties = [lawler_moore(problem, start).penalty for start in range(problem.due + 1)]
    assert all(earlier <= later for earlier, later in zip(penalties, penalties[1:]))


def test_latest_start_examples():
    problem = LmProblem.of([(2, 0, 10)], due=5)
    latest = lm_latest_start(problem, 0)
    assert latest.feasible
    assert latest.start == 3
    assert latest.solution.on_time == (0,)

    assert lm_latest_start(problem, problem.total_cost).start == 5
    assert lm_latest_start(problem, problem.total_cost).solution.late == (0,)


def test_latest_start_infeasible_without_budget():
    problem = LmProblem.of([(3, 2, 4)], due=4)
    latest = lm_latest_start(problem, 3)
    assert not latest.feasible
    assert latest.solution is None
    assert not lm_latest_start(problem, -1).feasible


@given(lm_problems(max_n=7), st.integers(0, 20))
def test_latest_start_matches_subset_enumeration(problem, budget):
    latest = lm_latest_start(problem, budget)
    assert latest.start == brute_latest_start(problem, budget)
    if latest.feasible:
        assert latest.solution.penalty <= budget
        assert block_start(problem, latest.solution.on_time) == latest.start


@given(lm_problems(max_n=6))
def test_latest_start_is_monotone_in_budget(problem):
    profile = LmProfile(problem)
    starts = [profile.start_at(budget) for budget in range(profile.cap + 1)]
    feasible = [start for start in starts if start is not None]
    assert feasible == sorted(feasible)
    assert starts[-1] == problem.due


def test_profile_breakpoints():
    profile = LmProfile(LmProblem.of([(2, 0, 10)], due=5))
    assert profile.breakpoints() == [(0, 3), (10, 5)]
    assert profile.start_at(9) == 3
    assert profile.start_at(-1) is None


@given(lm_problems(max_n=5, max_c=5))
def test_breakpoints_agree_with_start_at(problem):
    profile = LmProfile(problem)
    for budget, start in profile.breakpoints():
        assert profile.start_at(budget) == start
        assert budget == 0 or profile.start_at(budget - 1) != start


@pytest.mark.slow
def test_full_size_problems_match_subset_enumeration():
    rng = np.random.Generator(np.random.PCG64(11))
    checked = 0
    while checked < 1000:
        n = int(rng.integers(1, 11))
        jobs = [(int(rng.integers(1, 6)), int(rng.integers(0, 12)), int(rng.integers(0, 10))) for _ in range(n)]
        if sum(p for p, _, _ in jobs) > 30:
            continue
        problem = LmProblem.of(jobs, int(rng.integers(0, 31)))
        start = int(rng.integers(0, problem.due + 1))
        assert lawler_moore(problem, start).penalty == brute_lm_penalty(problem, start)
        budget = int(rng.integers(0, 25))
        assert lm_latest_start(problem, budget).start == brute_latest_start(problem, budget)
        checked += 1
