"""
Delta grid and hierarchical deadline sets
"""
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import single_instances
from flowsched.deadlines import DeltaGrid, build_deadlines
from flowsched.models import Instance

EPSILONS = st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(1, 3)])


def test_single_job_inserts_geometric_mean():
    instance = Instance.from_jobs([(2, 0, 1)])
    sets = build_deadlines(instance, 1)
    assert sets.horizon == 4
    assert sets.grid.scale == 1
    assert sets.points[0] == (0, 1, 2, 4)
    assert sets.intervals(0) == ((0, 1), (1, 2), (2, 4))
    assert sets.for_job(0) == sets.points[0]


def test_epsilon_is_rounded_down_to_a_unit_fraction():
    instance = Instance.from_jobs([(1, 0, 1), (1, 0, 1)])
    grid = DeltaGrid.for_instance(instance, Fraction(2, 5))
    assert grid.epsilon == Fraction(1, 3)
    assert grid.delta == Fraction(1, 6)
    assert grid.to_units(3) == 18
    assert grid.to_time(9) == Fraction(3, 2)


@pytest.mark.parametrize("epsilon, delta", [
    (Fraction(1, 2), Fraction(2, 3)),
    (Fraction(1, 2), Fraction(1)),
    (Fraction(0), None),
])
def test_bad_grids_are_rejected(epsilon, delta):
    with pytest.raises(ValueError):
        DeltaGrid.for_instance(Instance.from_jobs([(1, 0, 1)]), epsilon, delta)


@given(single_instances(max_n=4, max_p=3, max_r=6), EPSILONS)
def test_release_and_horizon_are_candidates(instance, epsilon):
    sets = build_deadlines(instance, epsilon)
    scale = sets.grid.scale
    for pos, job in enumerate(instance.jobs):
        row = sets.points[pos]
        assert list(row) == sorted(set(row))
        assert job.r * scale in row
        assert (job.r + 1) * scale in row
        assert row[-1] == instance.horizon * scale


@given(single_instances(max_n=4, max_p=3, max_r=6), EPSILONS)
def test_consecutive_flow_ratios_are_bounded(instance, epsilon):
    sets = build_deadlines(instance, epsilon)
    scale = sets.grid.scale
    bound = 1 + sets.grid.epsilon
    for pos, job in enumerate(instance.jobs):
        base = job.r * scale
        for low, high in sets.intervals(pos):
            if low >= base + scale:
                assert Fraction(high - base, low - base) <= bound


@given(single_instances(max_n=4, max_p=3, max_r=6), EPSILONS)
def test_later_sets_keep_earlier_points(instance, epsilon):
    sets = build_deadlines(instance, epsilon)
    scale = sets.grid.scale
    for pos in range(instance.n - 1):
        following = set(sets.points[pos + 1])
        release = instance.jobs[pos + 1].r * scale
        assert {point for point in sets.points[pos] if point >= release} <= following


@given(single_instances(max_n=4, max_p=3, max_r=12), EPSILONS)
def test_set_sizes_stay_within_bound(instance, epsilon):
    sets = build_deadlines(instance, epsilon)
    assert all(len(row) <= sets.cardinality_bound() for row in sets.points)
