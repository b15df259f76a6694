"""
Exact oracles
"""
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import best_priority_cost, exhaustive_single, single_instances
from flowsched.errors import OracleBudgetExceeded
from flowsched.models import INF, CostModel, Instance
from flowsched.oracle import oracle_multi, oracle_single
from flowsched.validation import objective, validate_schedule

WEIGHTED_FLOW = CostModel.weighted_flow()


def test_single_job():
    result = oracle_single(Instance.from_jobs([(1, 0, 1)]), WEIGHTED_FLOW)
    assert result.objective == 1
    assert result.states > 0


def test_short_heavy_job_goes_first(two_job_instance):
    result = oracle_single(two_job_instance, WEIGHTED_FLOW)
    assert result.objective == 13
    assert [(slot.start, slot.end, slot.job) for slot in result.schedule.slots] == [(0, 1, 1), (1, 3, 0)]


def test_schedule_reproduces_the_optimum(three_job_instance):
    model = CostModel.norm(2)
    result = oracle_single(three_job_instance, model)
    assert validate_schedule(three_job_instance, result.schedule).ok
    assert objective(three_job_instance, result.schedule, model) == result.objective


@given(single_instances(max_n=3, max_p=2, max_r=3), st.sampled_from([Fraction(1), Fraction(2)]))
def test_matches_unmemoized_search(instance, p):
    model = CostModel.norm(p)
    assert oracle_single(instance, model).objective == exhaustive_single(instance, model)


@given(single_instances(max_n=4, max_p=3, max_r=4))
def test_never_worse_than_a_priority_order(instance):
    assert oracle_single(instance, WEIGHTED_FLOW).objective <= best_priority_cost(instance, WEIGHTED_FLOW)


@given(single_instances(max_n=4), st.integers(2, 4))
def test_scaling_weights_scales_the_optimum(instance, factor):
    scaled = Instance.from_jobs([(job.p, job.r, job.w * factor) for job in instance.by_id])
    assert oracle_single(scaled, WEIGHTED_FLOW).objective == factor * oracle_single(instance, WEIGHTED_FLOW).objective


@given(single_instances(max_n=4), st.data())
def test_dropping_a_job_never_costs_more(instance, data):
    if instance.n == 1:
        return
    job_id = data.draw(st.integers(0, instance.n - 1))
    smaller = instance.drop_job(job_id)
    assert oracle_single(smaller, WEIGHTED_FLOW).objective <= oracle_single(instance, WEIGHTED_FLOW).objective


@given(single_instances(max_n=4), st.randoms(use_true_random=False))
def test_relabeling_keeps_the_optimum(instance, rng):
    triples = [(job.p, job.r, job.w) for job in instance.by_id]
    rng.shuffle(triples)
    relabeled = Instance.from_jobs(triples)
    assert oracle_single(relabeled, WEIGHTED_FLOW).objective == oracle_single(instance, WEIGHTED_FLOW).objective


def test_single_oracle_budget():
    instance = Instance.from_jobs([(5, 0, 1)] * 5)
    with pytest.raises(OracleBudgetExceeded) as exc_info:
        oracle_single(instance, CostModel.weighted_flow())
    assert "too large for oracle" in str(exc_info.value)


def test_one_row_matrix_overrides_p():
    instance = Instance.from_jobs([(1, 0, 1)], machines=[[2]])
    result = oracle_single(instance, WEIGHTED_FLOW)
    assert result.objective == 2
    assert validate_schedule(instance, result.schedule).ok
    assert result.objective == oracle_multi(instance, WEIGHTED_FLOW).objective


def test_single_oracle_rejects_several_machines():
    with pytest.raises(ValueError):
        oracle_single(Instance.from_jobs([(1, 0, 1)], machines=[[1], [1]]), CostModel.weighted_flow())


@given(single_instances(max_n=3, max_p=2, max_r=2))
def test_multi_with_one_machine_agrees_with_single(instance):
    assert oracle_multi(instance, WEIGHTED_FLOW).objective == oracle_single(instance, WEIGHTED_FLOW).objective


def test_two_identical_machines_run_unit_jobs_in_parallel():
    instance = Instance.from_jobs([(1, 0, 1), (1, 0, 1)], machines=[[1, 1], [1, 1]])
    result = oracle_multi(instance, WEIGHTED_FLOW)
    assert result.objective == 2
    assert validate_schedule(instance, result.schedule).ok


def test_job_restricted_to_one_machine():
    instance = Instance.from_jobs([(1, 0, 3)], machines=[[1], [INF]])
    result = oracle_multi(instance, WEIGHTED_FLOW)
    assert result.objective == 3
    assert {slot.machine for slot in result.schedule.slots} == {0}


def test_half_slots_finish_on_the_boundary():
    instance = Instance.from_jobs([(1, 0, 1)], machines=[[1]])
    result = oracle_multi(instance, WEIGHTED_FLOW, delta=Fraction(1, 2))
    assert result.objective == 1
    assert result.schedule.completion[0] == 1


@given(st.lists(st.tuples(st.sampled_from([1, 2, INF]), st.sampled_from([1, 2, INF]), st.integers(0, 2)),
                min_size=1, max_size=3))
def test_migration_never_hurts(columns):
    rows = [[first if (first, second) != (INF, INF) else 1 for first, second, _ in columns],
            [second for _, second, _ in columns]]
    triples = [(min(rows[0][j], rows[1][j]), columns[j][2], 1) for j in range(len(columns))]
    instance = Instance.from_jobs(triples, machines=rows)
    model = CostModel.weighted_flow()
    free = oracle_multi(instance, model, migration=True).objective
    pinned = oracle_multi(instance, model, migration=False)
    assert free <= pinned.objective
    for job in instance.jobs:
        assert len({slot.machine for slot in pinned.schedule.for_job(job.id)}) == 1


def test_multi_oracle_budgets():
    with pytest.raises(OracleBudgetExceeded):
        oracle_multi(Instance.from_jobs([(1, 0, 1)], machines=[[1], [1], [1]]), CostModel.weighted_flow())
    with pytest.raises(OracleBudgetExceeded):
        oracle_multi(Instance.from_jobs([(4, 0, 1)] * 4, machines=[[4] * 4, [4] * 4]),
                     CostModel.weighted_flow(), delta=Fraction(1, 2))
    with pytest.raises(ValueError):
        oracle_multi(Instance.from_jobs([(1, 0, 1)]), CostModel.weighted_flow(), delta=Fraction(2, 3))
