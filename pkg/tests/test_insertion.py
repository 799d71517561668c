import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from identity_zne.circuit import build_double_cnot, build_four_cnot
from identity_zne.insertion import (
    InsertionPlan,
    OperatorSet,
    apply_plan,
    enumerate_placements,
    fiim_transform,
    max_gate_count,
    operator_sets,
    plan_gate_count,
    riim_random_plan,
    sample_placement,
)
from identity_zne.simulator import NoiseModel, Observable, evolve, expectation


def test_plan_validation():
    with pytest.raises(ValueError):
        InsertionPlan((1, 2))
    with pytest.raises(ValueError):
        InsertionPlan((-1,))
    assert str(InsertionPlan.parse("3, 1,5")) == "3,1,5"
    with pytest.raises(ValueError):
        InsertionPlan.parse("3,x")


def test_opset_normalises():
    assert OperatorSet((3, 5, 3)) == OperatorSet((5, 3, 3))
    assert OperatorSet((5, 3, 3)).order == 4
    with pytest.raises(ValueError):
        OperatorSet((1,))
    with pytest.raises(ValueError):
        OperatorSet((4,))


# apply_plan ----------------------------------------------------------------


def test_all_ones_is_identity_transform():
    c = build_four_cnot()
    assert apply_plan(c, InsertionPlan.ones(4)) == c
    assert fiim_transform(c, 1) == c


def test_plan_length_must_match():
    with pytest.raises(ValueError):
        apply_plan(build_double_cnot(), InsertionPlan((1, 1, 1)))


def test_plan_3_3_keeps_unitary():
    c = build_double_cnot()
    out = apply_plan(c, InsertionPlan((3, 3)))
    assert out.cnot_count == 6
    assert np.allclose(out.unitary(), c.unitary())


def test_plan_3_1_under_noise():
    eps = 0.02
    out = apply_plan(build_double_cnot(), InsertionPlan((3, 1)))
    assert expectation(evolve(out, 0), Observable.projector(2, 0)) == pytest.approx(1)
    value = expectation(evolve(out, 0, NoiseModel.depolarizing(eps)), Observable.qubit_sum(2))
    assert value == pytest.approx(1 - (1 - eps) ** 4, abs=1e-14)


def test_fiim_transform_counts():
    assert fiim_transform(build_four_cnot(), 3).cnot_count == 12
    with pytest.raises(ValueError):
        fiim_transform(build_four_cnot(), 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4).map(lambda k: 2 * k + 1), min_size=4, max_size=4))
def test_applied_plan_counts_and_order(reps):
    plan = InsertionPlan(tuple(reps))
    out = apply_plan(build_four_cnot(), plan)
    assert out.cnot_count == sum(reps) == plan_gate_count(plan)
    # runs of identical gates appear in circuit order
    runs = [(g, len(list(grp))) for g, grp in itertools.groupby(out.gates)]
    assert [n for _, n in runs] == reps
    assert np.allclose(out.unitary(), build_four_cnot().unitary())


# random plans --------------------------------------------------------------


def test_poisson_zero_is_all_ones():
    assert riim_random_plan(7, 0.0, 1) == InsertionPlan.ones(7)


def test_poisson_mean():
    # 10^5 four-CNOT plans
    n = [(r - 1) / 2 for d in range(10**5) for r in riim_random_plan(4, 0.3, d)]
    assert np.mean(n) == pytest.approx(0.3, rel=0.01)


def test_poisson_gate_count_regression():
    n_cnots, eps = 4, 0.01
    nus = [0.0, 0.25, 0.5, 1.0]
    means = [
        np.mean([sum(riim_random_plan(n_cnots, nu, (k, d))) * eps for d in range(4000)])
        for k, nu in enumerate(nus)
    ]
    rhos = [1 + 2 * nu for nu in nus]
    slope, intercept = np.polyfit(rhos, means, 1)
    assert slope == pytest.approx(n_cnots * eps, rel=0.03)
    assert intercept == pytest.approx(0, abs=2e-3)


def test_poisson_plans_are_seeded():
    assert riim_random_plan(10, 0.7, 3) == riim_random_plan(10, 0.7, 3)
    with pytest.raises(ValueError):
        riim_random_plan(3, -0.1, 0)


# placements ----------------------------------------------------------------


@pytest.mark.parametrize(
    "n,excess,count",
    [(4, (3,), 4), (4, (3, 3), 6), (4, (), 1), (4, (5, 3), 12), (5, (3, 3, 5), 30), (2, (3, 3, 3), 0)],
)
def test_placement_count(n, excess, count):
    assert OperatorSet(excess).placement_count(n) == count


def test_empty_set_placement():
    assert enumerate_placements(6, OperatorSet(())) == [InsertionPlan.ones(6)]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.lists(st.sampled_from([3, 5, 7]), max_size=4))
def test_enumeration_is_complete_and_distinct(n, excess):
    opset = OperatorSet(tuple(excess))
    if len(excess) > n:
        with pytest.raises(ValueError):
            enumerate_placements(n, opset)
        return
    plans = enumerate_placements(n, opset)
    assert len(plans) == len(set(plans)) == opset.placement_count(n)
    # brute force: all distinct arrangements of the multiset over n slots
    slots = list(excess) + [1] * (n - len(excess))
    brute = {InsertionPlan(p) for p in itertools.permutations(slots)}
    assert set(plans) == brute
    for p in plans:
        assert p.gate_count == n + sum(e - 1 for e in excess)


def test_sample_placement_uniform():
    counts = Counter(sample_placement(4, OperatorSet((3,)), s) for s in range(10**4))
    assert len(counts) == 4
    for c in counts.values():
        assert c / 10**4 == pytest.approx(0.25, abs=0.02)


def test_sample_placement_ordered_values():
    seen = {sample_placement(4, OperatorSet((5, 3)), s) for s in range(10**4)}
    assert len(seen) == 12


def test_sample_single_slot():
    assert sample_placement(1, OperatorSet((3,)), 9) == InsertionPlan((3,))


# gate budgets --------------------------------------------------------------


def test_operator_sets_by_order():
    assert [str(s) for s in operator_sets(3)] == ["{7}", "{5,3}", "{3,3,3}"]
    assert len(operator_sets(4)) == 5


@pytest.mark.parametrize("n_cnots", [2, 4, 14])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_riim_plan_gate_count(n_cnots, order):
    plans = [
        p for s in operator_sets(order) if len(s) <= n_cnots for p in enumerate_placements(n_cnots, s)
    ]
    assert max_gate_count(plans) == n_cnots + 2 * order
    assert all(p.gate_count == n_cnots + 2 * order for p in plans)


def test_plan_gate_count_examples():
    assert plan_gate_count(InsertionPlan.uniform(4, 5)) == 20
    assert plan_gate_count(InsertionPlan.ones(9)) == 9
    assert math.comb(4, 2) == len(enumerate_placements(4, OperatorSet((3, 3))))
