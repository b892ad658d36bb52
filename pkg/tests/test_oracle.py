import pytest
from hypothesis import given, settings, strategies as st

from mwisr import geodp, oracle
from mwisr.geom import Rect
from mwisr.instance import Instance

from helpers import small_instance

CROSS = Instance((Rect("a", 0, 0, 6, 1, 2), Rect("b", 0, 2, 6, 3, 2), Rect("v", 2, 0, 3, 3, 3)), 6)


def test_trivial_cases():
    assert oracle.brute_force_opt(Instance((), 3)).opt_weight == 0
    disjoint = Instance(tuple(Rect(i, i, 0, i + 1, 1, i + 1) for i in range(4)), 4)
    res = oracle.brute_force_opt(disjoint)
    assert res.opt_weight == 10 and res.opt_set == {0, 1, 2, 3}


def test_three_overlapping():
    inst = Instance((Rect(0, 0, 0, 3, 3, 3), Rect(1, 1, 1, 4, 4, 4), Rect(2, 2, 0, 4, 2, 5)), 4)
    assert oracle.brute_force_opt(inst).opt_weight == 5
    assert oracle.enumerate_opt(inst).opt_weight == 5


def test_greedy_examples():
    assert oracle.greedy_weight(CROSS).total_weight == 3
    assert oracle.brute_force_opt(CROSS).opt_weight == 4
    single = Instance((Rect(0, 0, 0, 1, 1, 9),), 1)
    assert oracle.greedy_weight(single).rect_ids == {0}


def test_cap():
    big = Instance(tuple(Rect(i, 0, 0, 1, 1, 1) for i in range(21)), 1)
    with pytest.raises(oracle.OracleCapError):
        oracle.brute_force_opt(big)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_branch_and_bound_matches_enumeration(seed):
    inst = small_instance(seed, n_max=12)
    assert oracle.brute_force_opt(inst).opt_weight == oracle.enumerate_opt(inst).opt_weight


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_ordering_of_baselines(seed):
    inst = small_instance(seed, n_max=9)
    if inst.n == 0:
        return
    opt = oracle.brute_force_opt(inst)
    greedy = oracle.greedy_weight(inst)
    assert opt.opt_weight >= greedy.total_weight >= max(r.weight for r in inst.rects)
    assert oracle.verify_solution(inst, opt).ok
    assert oracle.verify_solution(inst, greedy).ok


def test_verify_reports_overlap_and_unknown():
    rep = oracle.verify_solution(CROSS, ["a", "v"], claimed_weight=5)
    assert not rep.ok and rep.overlapping_pairs == [("a", "v")]
    with pytest.raises(oracle.UnknownIdError):
        oracle.verify_solution(CROSS, ["zz"])
    assert not oracle.verify_solution(CROSS, ["a", "b"], claimed_weight=5).weight_ok


def test_geodp_solutions_verify():
    for seed in range(30):
        inst = small_instance(seed)
        sol = geodp.solve(inst)
        assert oracle.verify_solution(inst, sol).ok
        assert sol.total_weight <= oracle.brute_force_opt(inst).opt_weight
