"""
Budgeted DP for the weighted p-norm of flow time
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import single_instances
from flowsched.costs import certified_le, norm_ratio, poly_guarantee
from flowsched.dp_poly import BudgetGrid, PolyTable, build_table, floor_to_unit, solve_cell_poly, solve_poly
from flowsched.dp_pseudo import solve_pseudo
from flowsched.models import CostModel, Instance
from flowsched.oracle import oracle_single
from flowsched.validation import validate_schedule

EXPONENTS = [Fraction(1, 2), Fraction(1), Fraction(2)]


def test_floor_to_unit():
    unit = Fraction(3, 4)
    assert floor_to_unit(Fraction(0), unit) == 0
    assert floor_to_unit(unit, unit) == unit
    assert floor_to_unit(Fraction(5, 2) * unit, unit) == 2 * unit
    with pytest.raises(ValueError):
        floor_to_unit(Fraction(-1), unit)


def test_budget_grid_for_single_job():
    grid = BudgetGrid.for_instance(Instance.from_jobs([(3, 0, 2)]), CostModel.weighted_flow(Fraction(1, 2)))
    assert grid.lower_bound == 6
    assert grid.unit == 3
    # factor 6 times n^2 over epsilon
    assert grid.max_units == 12
    assert grid.units(2, 4) == 2
    assert grid.to_cost(2) == 6


def test_single_job_is_optimal():
    result = solve_poly(Instance.from_jobs([(3, 0, 2)]), CostModel.weighted_flow(Fraction(1, 2)))
    assert result.objective == 6
    assert [(slot.start, slot.end) for slot in result.schedule.slots] == [(0, 3)]


def test_leaf_needs_the_fresh_jobs_budget():
    instance = Instance.from_jobs([(1, 0, 1)])
    model = CostModel.weighted_flow(Fraction(1, 2))
    table = PolyTable(instance, BudgetGrid.for_instance(instance, model), capped=False)
    # a unit job charged w * 1 = 2 units of 1/2
    assert solve_cell_poly(table, 0, 1, 1) is None
    entry = solve_cell_poly(table, 0, 1, 2)
    assert entry.start == 0
    assert entry.split == (0, 2, 0)


def test_empty_interval_keeps_its_start():
    instance = Instance.from_jobs([(4, 0, 1)])
    model = CostModel.weighted_flow()
    table = PolyTable(instance, BudgetGrid.for_instance(instance, model), capped=False)
    entry = solve_cell_poly(table, 7, 8, 3)
    assert entry.start == 7
    assert entry.deadlines == {}


def test_multi_machine_instances_are_rejected():
    instance = Instance.from_jobs([(1, 0, 1)], machines=[[1], [1]])
    with pytest.raises(ValueError):
        PolyTable(instance, BudgetGrid(Fraction(1), Fraction(1, 2), 1, Fraction(1), Fraction(1, 2), 12))


@given(single_instances(max_n=4, max_p=2, max_r=3, max_w=3))
def test_frontiers_match_direct_cell_evaluation(instance):
    table = build_table(instance, CostModel.weighted_flow(), capped=False)
    for index in sorted(table.intervals):
        s, t = table.tree.interval(index)
        for budget in range(6):
            stored = table.lookup(s, t, budget)
            direct = solve_cell_poly(table, s, t, budget)
            assert (stored is None) == (direct is None)
            if stored is not None:
                assert stored.start == direct.start


@given(single_instances(max_n=6, max_p=3, max_r=12))
def test_materialized_interval_count(instance):
    table = build_table(instance, CostModel.weighted_flow())
    levels = int(math.log2(instance.horizon)) + 1
    assert 1 in table.intervals
    assert len(table.intervals) <= 9 * instance.n * levels


@pytest.mark.parametrize("p", EXPONENTS)
def test_two_identical_jobs(p):
    instance = Instance.from_jobs([(1, 0, 1), (1, 0, 1)])
    result = solve_poly(instance, CostModel.norm(p))
    assert validate_schedule(instance, result.schedule).ok
    assert result.root_units >= 0
    assert result.intervals > 0


@given(single_instances(max_n=4, max_p=2, max_r=3, max_w=3), st.sampled_from(EXPONENTS))
def test_ratio_within_guarantee(instance, p):
    model = CostModel.norm(p, Fraction(1, 2))
    result = solve_poly(instance, model)
    assert validate_schedule(instance, result.schedule).ok
    optimum = oracle_single(instance, model).objective
    ratio = norm_ratio(result.objective, optimum, p)
    assert certified_le(ratio, poly_guarantee(p, model.epsilon))


def test_weighted_flow_guarantee_is_six_plus_epsilon():
    assert poly_guarantee(Fraction(1), Fraction(1, 2)) == Fraction(13, 2)


@given(single_instances(max_n=4, max_p=2, max_r=3, max_w=3))
def test_more_budget_never_starts_earlier(instance):
    table = build_table(instance, CostModel.weighted_flow(), capped=False)
    for index in sorted(table.intervals):
        s, t = table.tree.interval(index)
        previous = None
        for budget in range(8):
            entry = solve_cell_poly(table, s, t, budget)
            if previous is not None:
                assert entry is not None
                assert entry.start >= previous.start
            previous = entry
            stored = table.lookup(s, t, budget)
            assert (stored is None) == (entry is None)


@given(single_instances(max_n=4, max_p=2, max_r=3, max_w=3))
def test_weighted_flow_stays_close_to_pseudo(instance):
    epsilon = Fraction(1, 2)
    result = solve_poly(instance, CostModel.weighted_flow(epsilon))
    pseudo = solve_pseudo(instance)
    assert result.objective <= pseudo.objective * (1 + epsilon) + epsilon * result.grid.lower_bound


@pytest.mark.slow
@pytest.mark.parametrize("epsilon", [Fraction(1, 4), Fraction(1, 2)])
def test_guarantee_on_seeded_sweep(epsilon):
    rng = np.random.Generator(np.random.PCG64(5))
    checked = 0
    while checked < 200:
        n = int(rng.integers(1, 6))
        triples = [(int(rng.integers(1, 4)), int(rng.integers(0, 7)), int(rng.integers(1, 5))) for _ in range(n)]
        if sum(p for p, _, _ in triples) > 10:
            continue
        instance = Instance.from_jobs(triples)
        for p in EXPONENTS:
            model = CostModel.norm(p, epsilon)
            result = solve_poly(instance, model)
            assert validate_schedule(instance, result.schedule).ok
            optimum = oracle_single(instance, model).objective
            assert certified_le(norm_ratio(result.objective, optimum, p), poly_guarantee(p, epsilon)), triples
        checked += 1
