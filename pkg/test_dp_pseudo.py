"""
Dyadic tree and the pseudopolynomial weighted flow time DP
"""
import math

import numpy as np
import pytest
from hypothesis import given

from conftest import single_instances
from flowsched.bench import BenchTask, run_task
from flowsched.dp_pseudo import PseudoTable, cell_cost, solve_cell, solve_pseudo
from flowsched.dyadic import DyadicTree
from flowsched.edf import density_feasible
from flowsched.gen import AdversarialKind, gen_adversarial
from flowsched.models import INF, CostModel, DeadlineAssignment, Instance
from flowsched.oracle import oracle_single
from flowsched.validation import validate_schedule


def test_tree_indexing():
    tree = DyadicTree(8)
    assert len(tree) == 15
    assert tree.interval(1) == (0, 8)
    assert tree.interval(3) == (4, 8)
    assert tree.interval(5) == (2, 4)
    assert tree.index_of(6, 7) == 14
    assert tree.children(5) == (10, 11)
    assert tree.children(14) is None
    assert tree.parent(14) == 7
    for index in range(1, len(tree) + 1):
        assert tree.index_of(*tree.interval(index)) == index


def test_tree_earliest_starts():
    tree = DyadicTree(16)
    assert tree.earliest_start(1) == 0
    # [8, 12) is a left child: 8 - 2*4
    assert tree.earliest_start(tree.index_of(8, 12)) == 0
    # [14, 16) is a right child: 14 - 3*2
    assert tree.earliest_start(tree.index_of(14, 16)) == 8
    assert tree.earliest_start(tree.index_of(12, 14)) == 8
    assert tree.earliest_start(tree.index_of(13, 14)) == 10


def test_tree_rejects_bad_shapes():
    with pytest.raises(ValueError):
        DyadicTree(6)
    with pytest.raises(ValueError):
        DyadicTree(8).index_of(1, 3)


def test_bottom_up_visits_children_first():
    tree = DyadicTree(8)
    order = list(tree.bottom_up())
    assert sorted(order) == list(range(1, 16))
    position = {index: k for k, index in enumerate(order)}
    for index in order:
        children = tree.children(index)
        if children:
            assert all(position[child] < position[index] for child in children)


def test_cell_cost_rule():
    job = Instance.from_jobs([(1, 2, 3)]).job(0)
    assert cell_cost(job, 4, 4, 8) == 0
    assert cell_cost(job, INF, 4, 8) == 3 * 6
    assert cell_cost(job, 6, 4, 8) == 3 * 4


def test_leaf_cell_keeps_fresh_jobs_open():
    table = PseudoTable(Instance.from_jobs([(1, 0, 2), (1, 0, 3)]))
    cell = solve_cell(table, 0, 1, 0)
    assert cell.deadlines == {0: INF, 1: INF}
    assert cell.cost == 5


def test_empty_cell_costs_nothing():
    table = PseudoTable(Instance.from_jobs([(4, 0, 1)]))
    cell = solve_cell(table, 7, 8, 4)
    assert cell.deadlines == {}
    assert cell.cost == 0


def test_cell_rejects_start_outside_range():
    table = PseudoTable(Instance.from_jobs([(4, 0, 1)]))
    with pytest.raises(ValueError):
        solve_cell(table, 7, 8, 2)


def test_multi_machine_instances_are_rejected():
    with pytest.raises(ValueError):
        PseudoTable(Instance.from_jobs([(1, 0, 1)], machines=[[1], [1]]))


def test_small_examples_are_optimal():
    assert solve_pseudo(Instance.from_jobs([(1, 0, 1)])).objective == 1
    result = solve_pseudo(Instance.from_jobs([(1, 0, 1), (1, 0, 1)]))
    assert result.objective == 3
    assert [(slot.start, slot.end) for slot in result.schedule.slots] == [(0, 1), (1, 2)]


def test_three_jobs_within_factor_six(three_job_instance, weighted_flow):
    result = solve_pseudo(three_job_instance)
    optimum = oracle_single(three_job_instance, weighted_flow).objective
    assert result.root_cost <= 6 * optimum
    assert optimum <= result.objective <= result.root_cost


def test_cell_count_matches_tree():
    instance = Instance.from_jobs([(2, 0, 1), (1, 3, 2), (2, 5, 1)])
    tree = DyadicTree(instance.horizon)
    expected = sum(tree.interval(index)[0] - tree.earliest_start(index) + 1 for index in tree.bottom_up())
    assert solve_pseudo(instance).cells == expected


@given(single_instances(max_n=5, max_p=3, max_r=5))
def test_schedule_is_valid_and_within_factor_six(instance):
    model = CostModel.weighted_flow()
    result = solve_pseudo(instance)
    assert validate_schedule(instance, result.schedule).ok
    assert result.objective <= result.root_cost
    assert result.objective <= 6 * oracle_single(instance, model).objective


@pytest.mark.slow
def test_factor_six_on_seeded_sweep():
    model = CostModel.weighted_flow()
    rng = np.random.Generator(np.random.PCG64(7))
    checked = 0
    while checked < 500:
        n = int(rng.integers(1, 8))
        triples = [(int(rng.integers(1, 4)), int(rng.integers(0, 9)), int(rng.integers(1, 6))) for _ in range(n)]
        if sum(p for p, _, _ in triples) > 16:
            continue
        instance = Instance.from_jobs(triples)
        assert solve_pseudo(instance).objective <= 6 * oracle_single(instance, model).objective
        checked += 1


def _solved_cells(instance: Instance):
    table = PseudoTable(instance)
    tree = table.tree
    for index in tree.bottom_up():
        s, t = tree.interval(index)
        for b in range(tree.earliest_start(index), s + 1):
            table.store(index, solve_cell(table, s, t, b))
    return table.cells.values()


def _feasible_from_start(instance: Instance, cell) -> bool:
    """Finite deadlines of the cell fit once releases are clamped to b"""
    triples, due = [], []
    for job in instance.jobs:
        deadline = cell.deadlines.get(job.id, INF)
        if deadline != INF:
            triples.append((job.p, max(job.r, cell.b), job.w))
            due.append(deadline)
    if not triples:
        return True
    return density_feasible(Instance.from_jobs(triples), DeadlineAssignment(tuple(due)))


@given(single_instances(max_n=4, max_p=2, max_r=4))
def test_every_cell_is_feasible_from_its_start(instance):
    for cell in _solved_cells(instance):
        assert _feasible_from_start(instance, cell), (cell.s, cell.t, cell.b)


@pytest.mark.slow
def test_cell_feasibility_on_seeded_sweep():
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(200):
        n = int(rng.integers(1, 7))
        instance = Instance.from_jobs(
            [(int(rng.integers(1, 4)), int(rng.integers(0, 9)), int(rng.integers(1, 6))) for _ in range(n)])
        for cell in _solved_cells(instance):
            assert _feasible_from_start(instance, cell), (instance.jobs, cell.s, cell.t, cell.b)


@pytest.mark.slow
def test_bench_cell_count_grows_at_most_quadratically():
    counts = []
    for n in (2, 4, 8, 16):
        instance = gen_adversarial(AdversarialKind.STAIRCASE_RELEASES, n)
        row = run_task(BenchTask(f"staircase-{n}", None, instance, "pseudo", CostModel.weighted_flow(), False))
        counts.append((instance.horizon, row["cells"]))
    for horizon, cells in counts:
        assert cells <= 4 * horizon ** 2
    for (short, fewer), (long, more) in zip(counts, counts[1:]):
        assert long == 2 * short
        assert math.log(more / fewer) / math.log(2) <= 2.2
