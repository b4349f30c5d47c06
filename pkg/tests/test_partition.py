"""Tests for bag-building: baselines, iterative rebalancing, binary speeds."""

import math

import pytest

from speedsched.gen import SplitMix64
from speedsched.model import Assignment, Partition, bag_load, beta_ratio, validate_partition
from speedsched.partition import (
    IprConfig,
    binary_speed_partition,
    consistent_partition,
    fluid_ipr,
    ipr,
    lpt_partition,
    lpt_rebalance,
)

UNIT = 1.0


def bag_loads(partition, jobs):
    return [bag_load(b, jobs) for b in partition.bags]


# ---------------------------------------------------------------------------
# IprConfig validation
# ---------------------------------------------------------------------------


def test_ipr_config_defaults():
    cfg = IprConfig(alpha=0.5)
    assert cfg.rho == 4.0
    assert cfg.initial_solver == "exact"


def test_ipr_config_rejects_bad_alpha():
    for alpha in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            IprConfig(alpha=alpha)


def test_ipr_config_rejects_bad_rho():
    with pytest.raises(ValueError):
        IprConfig(alpha=0.5, rho=0.5)


def test_ipr_config_rejects_bad_solver():
    with pytest.raises(ValueError):
        IprConfig(alpha=0.5, initial_solver="greedy")


def test_ipr_config_rejects_bad_budget():
    with pytest.raises(ValueError):
        IprConfig(alpha=0.5, node_budget=0)


# ---------------------------------------------------------------------------
# lpt_partition
# ---------------------------------------------------------------------------


def test_lpt_partition_example():
    part = lpt_partition([5.0, 4.0, 3.0, 3.0, 3.0], 2)
    assert part.bags == ((0, 3), (1, 2, 4))
    assert bag_loads(part, [5.0, 4.0, 3.0, 3.0, 3.0]) == [8.0, 10.0]


def test_lpt_partition_unit_jobs():
    part = lpt_partition([UNIT] * 5, 2)
    assert part.bags == ((0, 2, 4), (1, 3))


def test_lpt_partition_single_bag():
    assert lpt_partition([2.0, 1.0], 1).bags == ((0, 1),)


def test_lpt_partition_more_bags_than_jobs():
    part = lpt_partition([3.0], 3)
    assert part.bags == ((0,), (), ())


def test_lpt_partition_rejects_bad_input():
    with pytest.raises(ValueError):
        lpt_partition([1.0], 0)
    with pytest.raises(ValueError):
        lpt_partition([-1.0], 2)


def test_lpt_partition_balance_within_two():
    """Largest multi-job bag never exceeds twice the smallest bag."""
    rng = SplitMix64(401)
    for _ in range(200):
        n = 2 + rng.next_u64() % 10
        k = 1 + rng.next_u64() % 4
        jobs = [0.5 + 9.5 * rng.next_float() for _ in range(n)]
        part = lpt_partition(jobs, k)
        validate_partition(part, n, k)
        beta = beta_ratio(part, jobs)
        if beta != math.inf:
            assert beta <= 2.0 + 1e-9


# ---------------------------------------------------------------------------
# consistent_partition
# ---------------------------------------------------------------------------


def test_consistent_partition_pairs_heavy_bags_with_fast_machines():
    result = consistent_partition([UNIT] * 9, (8.0, 1.0))
    assert [len(b) for b in result.partition.bags] == [8, 1]
    assert result.opt_c_bar == 1.0


def test_consistent_partition_small_example():
    result = consistent_partition([3.0, 2.0, 2.0], (2.0, 1.0))
    assert result.partition.bags == ((0, 2), (1,))
    assert result.opt_c_bar == 2.5


def test_consistent_partition_single_machine():
    result = consistent_partition([4.0, 1.0], (2.0,))
    assert result.partition.bags == ((0, 1),)
    assert result.opt_c_bar == 2.5


def test_consistent_partition_lpt_solver_close_to_exact():
    rng = SplitMix64(402)
    for _ in range(50):
        n = 2 + rng.next_u64() % 8
        m = 1 + rng.next_u64() % 3
        jobs = [0.5 + 9.5 * rng.next_float() for _ in range(n)]
        speeds = [0.5 + 4.0 * rng.next_float() for _ in range(m)]
        exact = consistent_partition(jobs, speeds, solver="exact")
        greedy = consistent_partition(jobs, speeds, solver="lpt")
        validate_partition(greedy.partition, n, m)
        assert exact.opt_c_bar <= greedy.opt_c_bar + 1e-9 * max(1.0, greedy.opt_c_bar)


def test_consistent_partition_rejects_bad_solver():
    with pytest.raises(ValueError):
        consistent_partition([1.0], (1.0,), solver="greedy")


def test_consistent_partition_rejects_bad_speeds():
    with pytest.raises(ValueError):
        consistent_partition([1.0], (0.0,))
    with pytest.raises(ValueError):
        consistent_partition([1.0], ())


# ---------------------------------------------------------------------------
# lpt_rebalance
# ---------------------------------------------------------------------------


def test_lpt_rebalance_moves_min_bag_into_heaviest_collection():
    asg = Assignment(collections=((tuple(range(8)),), ((8,),)))
    out = lpt_rebalance(asg, [UNIT] * 9)
    assert out.collections == (((0, 2, 4, 6, 8), (1, 3, 5, 7)), ())


def test_lpt_rebalance_within_one_collection():
    asg = Assignment(collections=(((0, 1), (2,)), ()))
    out = lpt_rebalance(asg, [2.0, 2.0, 1.0])
    assert out.collections == (((0, 2), (1,)), ())


def test_lpt_rebalance_three_collections():
    asg = Assignment(collections=(((0,),), ((1, 2),), ((3,),)))
    out = lpt_rebalance(asg, [6.0, 3.0, 3.0, 1.0])
    assert out.collections == (((0,),), ((1, 3), (2,)), ())


def test_lpt_rebalance_requires_a_multi_job_bag():
    asg = Assignment(collections=(((0,),), ((1,),)))
    with pytest.raises(ValueError):
        lpt_rebalance(asg, [2.0, 1.0])


# ---------------------------------------------------------------------------
# ipr
# ---------------------------------------------------------------------------


def test_ipr_rebalances_skewed_prediction():
    res = ipr([UNIT] * 9, (8.0, 1.0), IprConfig(alpha=0.5))
    assert res.partition.bags == ((0, 2, 4, 6, 8), (1, 3, 5, 7))
    assert res.state.opt_c_bar == 1.0
    assert res.state.iterations == 1
    assert res.state.b_min_history == (1.0, 4.0)
    assert res.state.last_rebalance_load == 9.0
    assert res.state.last_rebalance_count == 2


def test_ipr_already_balanced_is_untouched():
    res = ipr([UNIT] * 4, (3.0, 1.0), IprConfig(alpha=0.5))
    assert sorted(len(b) for b in res.partition.bags) == [1, 3]
    assert res.state.iterations == 0
    assert res.state.b_min_history == (1.0,)


def test_ipr_commits_when_guard_allows():
    res = ipr([UNIT] * 10, (9.0, 1.0), IprConfig(alpha=0.5))
    assert sorted(len(b) for b in res.partition.bags) == [5, 5]
    assert res.state.iterations == 1


def test_ipr_consistency_guard_aborts():
    """A tight alpha rejects the rebalance and keeps the prediction-optimal
    bags; the attempted move is still recorded in the trace."""
    res = ipr([UNIT] * 9, (8.0, 1.0), IprConfig(alpha=0.01))
    assert sorted(len(b) for b in res.partition.bags) == [1, 8]
    assert res.state.iterations == 1
    assert res.state.b_min_history == (1.0,)
    assert res.state.last_rebalance_load == 9.0
    assert res.state.last_rebalance_count == 2


def test_ipr_output_is_valid_partition():
    rng = SplitMix64(403)
    for _ in range(100):
        n = 2 + rng.next_u64() % 10
        m = 1 + rng.next_u64() % 4
        jobs = [0.5 + 9.5 * rng.next_float() for _ in range(n)]
        speeds = [0.5 + 4.0 * rng.next_float() for _ in range(m)]
        res = ipr(jobs, speeds, IprConfig(alpha=0.5))
        validate_partition(res.partition, n, m)
        assert len(res.state.b_min_history) >= 1


def test_ipr_deterministic():
    jobs = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0]
    speeds = (5.0, 2.0, 1.0)
    a = ipr(jobs, speeds, IprConfig(alpha=0.3))
    b = ipr(jobs, speeds, IprConfig(alpha=0.3))
    assert a.partition == b.partition
    assert a.state.b_min_history == b.state.b_min_history


# ---------------------------------------------------------------------------
# fluid_ipr
# ---------------------------------------------------------------------------


def test_fluid_ipr_rebalances_to_equal_loads():
    assert fluid_ipr(9.0, (8.0, 1.0), alpha=0.5) == [4.5, 4.5]


def test_fluid_ipr_balanced_input_unchanged():
    assert fluid_ipr(3.0, (2.0, 1.0), alpha=0.5) == [2.0, 1.0]
    assert fluid_ipr(12.0, (3.0, 3.0, 3.0), alpha=0.5) == [4.0, 4.0, 4.0]


def test_fluid_ipr_guard_aborts():
    assert fluid_ipr(5.0, (4.0, 1.0), alpha=0.1) == [4.0, 1.0]


def test_fluid_ipr_conserves_load():
    rng = SplitMix64(404)
    for _ in range(100):
        m = 1 + rng.next_u64() % 5
        total = 1.0 + 99.0 * rng.next_float()
        speeds = [0.5 + 4.0 * rng.next_float() for _ in range(m)]
        alpha = 0.05 + 0.9 * rng.next_float()
        loads = fluid_ipr(total, speeds, alpha)
        assert sum(loads) == pytest.approx(total, rel=1e-9)
        assert all(x >= 0.0 for x in loads)


def test_fluid_ipr_rejects_bad_input():
    with pytest.raises(ValueError):
        fluid_ipr(0.0, (1.0,), alpha=0.5)
    with pytest.raises(ValueError):
        fluid_ipr(math.inf, (1.0,), alpha=0.5)
    with pytest.raises(ValueError):
        fluid_ipr(1.0, (1.0,), alpha=1.0)
    with pytest.raises(ValueError):
        fluid_ipr(1.0, (1.0,), alpha=0.5, rho=0.9)
    with pytest.raises(ValueError):
        fluid_ipr(1.0, (0.0,), alpha=0.5)


# ---------------------------------------------------------------------------
# binary_speed_partition
# ---------------------------------------------------------------------------


def test_binary_partition_example():
    jobs = [4.0, 3.0, 2.0, 1.0]
    part = binary_speed_partition(jobs, m=4, m_hat=2)
    assert part.bags == ((0,), (3,), (1,), (2,))
    assert bag_loads(part, jobs) == [4.0, 1.0, 3.0, 2.0]


def test_binary_partition_uneven_split():
    jobs = [UNIT] * 6
    part = binary_speed_partition(jobs, m=5, m_hat=2)
    assert bag_loads(part, jobs) == [1.0, 1.0, 1.0, 2.0, 1.0]


def test_binary_partition_full_prediction_is_plain_split():
    jobs = [4.0, 3.0, 2.0, 1.0]
    part = binary_speed_partition(jobs, m=2, m_hat=2)
    validate_partition(part, 4, 2)
    assert sorted(bag_loads(part, jobs)) == [5.0, 5.0]


def test_binary_partition_rejects_bad_counts():
    with pytest.raises(ValueError):
        binary_speed_partition([1.0], m=0, m_hat=1)
    with pytest.raises(ValueError):
        binary_speed_partition([1.0], m=2, m_hat=0)
    with pytest.raises(ValueError):
        binary_speed_partition([1.0], m=2, m_hat=3)


def test_binary_partition_covers_all_jobs():
    rng = SplitMix64(405)
    for _ in range(100):
        n = 1 + rng.next_u64() % 10
        m = 1 + rng.next_u64() % 5
        m_hat = 1 + rng.next_u64() % m
        jobs = [0.5 + 9.5 * rng.next_float() for _ in range(n)]
        part = binary_speed_partition(jobs, m, m_hat)
        validate_partition(part, n, m)
