import random

import pytest

from flowplan import planner
from flowplan.graph import GOAL_REPLACEMENT, LABELED, Instance, Plan, grid_graph, path_graph, validate_plan
from flowplan.instances import random_grid_instance, tradeoff_instance, two_star_instance
from flowplan.oracle import (
    OracleGuardExceeded,
    arrival_makespan_tradeoff,
    distance_makespan_tradeoff,
    joint_moves,
    oracle_escape,
    oracle_goal_replacement,
    oracle_min_makespan,
    oracle_min_total_arrival,
    oracle_min_total_distance,
)


def test_single_agent_on_a_path():
    inst = Instance(path_graph(4), (0,), (3,))
    assert oracle_min_makespan(inst).value == 3
    assert oracle_min_total_distance(inst).value == 3
    assert oracle_min_total_arrival(inst).value == 3


def test_two_star():
    inst = two_star_instance(2, 3)
    for fn, value, stat in [
        (oracle_min_makespan, 4, "makespan"),
        (oracle_min_total_distance, 6, "total_distance"),
        (oracle_min_total_arrival, 7, "total_arrival"),
    ]:
        res = fn(inst)
        assert res.value == value
        assert validate_plan(inst, res.plan) == []
        assert getattr(res.plan, stat) == value


def test_corner_swap_matches_flow_solver():
    g = grid_graph(3, 3)
    inst = Instance(g, (0, 2), (6, 8))
    assert oracle_min_makespan(inst).value == planner.solve_min_makespan(inst).objective_value


def test_joint_moves_forbid_meets_and_swaps():
    g = path_graph(3)
    moves = set(joint_moves(g, (0, 1)))
    assert (1, 0) not in moves  # swap
    assert (1, 1) not in moves  # meet
    assert (0, 2) in moves and (1, 2) in moves


def test_labeled_search_respects_identities():
    g = path_graph(3)
    inst = Instance(g, (0,), (2,), LABELED)
    assert oracle_min_makespan(inst).value == 2


def test_guard():
    inst = random_grid_instance(random.Random(1), 8, 8, 8, obstacle_ratio=0.0)
    with pytest.raises(OracleGuardExceeded):
        oracle_min_makespan(inst)


def test_goal_replacement_histograms():
    one = Instance(path_graph(3), (0,), (2,), GOAL_REPLACEMENT)
    assert oracle_goal_replacement(one).histogram == {2: 1}
    two = Instance(path_graph(3), (1, 0), (2, 2), GOAL_REPLACEMENT)
    best = oracle_goal_replacement(two)
    assert best.histogram == {1: 1, 2: 1}
    assert best.min_total_arrival == 3 and best.min_makespan == 2


def test_escape_oracle():
    g = grid_graph(3, 3)
    rim = planner.grid_boundary(g)
    assert oracle_escape(g, [4], rim) is not None
    assert oracle_escape(g, [0, 1, 2, 3, 4], [0, 1, 2, 3]) is None
    with pytest.raises(OracleGuardExceeded):
        oracle_escape(grid_graph(5, 5), [0], [])


def test_tradeoff_fixture_vectors():
    inst = tradeoff_instance()
    assert arrival_makespan_tradeoff(inst) == ((6, 3), (8, 2))
    assert distance_makespan_tradeoff(inst) == ((2, 8), (3, 6))


def test_witness_plans_are_optimal_and_valid():
    rng = random.Random(21)
    for _ in range(20):
        inst = random_grid_instance(rng, 3, 3, rng.randint(1, 3), obstacle_ratio=0.1)
        for fn, stat in [
            (oracle_min_makespan, "makespan"),
            (oracle_min_total_distance, "total_distance"),
            (oracle_min_total_arrival, "total_arrival"),
        ]:
            res = fn(inst)
            assert validate_plan(inst, res.plan) == []
            assert getattr(res.plan, stat) == res.value


def test_capped_searches_respect_the_cap():
    inst = two_star_instance(2, 3)
    assert oracle_min_total_arrival(inst, max_makespan=4).plan.makespan <= 4
    assert oracle_min_total_distance(inst, max_makespan=3).value is None
    assert oracle_min_makespan(inst, cap=3).value is None
    assert isinstance(oracle_min_makespan(inst).plan, Plan)
