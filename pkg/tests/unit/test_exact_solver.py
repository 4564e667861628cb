"""
Unit tests for the exact backends.
"""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from src.models.data_models import CostMatrix, ModelKind, SolveStatus
from src.services.blp_model import build_blp
from src.services.evaluator import check_feasibility
from src.services.exact_solver import FlowNetwork, brute_force, solve_blp_exact, solve_day, solve_ilp_exact
from src.services.ilp_model import build_ilp
from src.utils.config import Config
from src.utils.error_handler import InstanceTooLargeError, ModelInconsistencyError
from tests.fixtures.factories import make_instance, random_toy
from tests.fixtures.oracles import ilp_exhaustive, transportation_cost


@pytest.fixture
def frozen_clock(mocker):
    """perf_counter jumps 10 s per call, so any positive limit expires at once."""
    return mocker.patch("src.services.exact_solver.time.perf_counter", side_effect=itertools.count(0.0, 10.0))


class TestFlowNetwork:
    """Test the successive shortest path solver."""

    def test_matches_networkx_min_cost_flow(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n, eta = int(rng.integers(1, 9)), int(rng.integers(1, 4))
            costs = rng.integers(0, 1000, (n, eta))
            caps = rng.integers(0, n + 1, eta)
            caps[0] += max(0, n - int(caps.sum()))
            fleets = FlowNetwork(costs, caps, tie_break=False).solve()
            assert np.all(fleets >= 0)
            assert int(costs[np.arange(n), fleets].sum()) == transportation_cost(costs, caps)

    def test_tie_break_does_not_change_cost(self):
        rng = np.random.default_rng(8)
        costs = rng.integers(0, 5, (7, 3))
        caps = [3, 3, 3]
        plain = FlowNetwork(costs, caps, tie_break=False).solve()
        broken = FlowNetwork(costs, caps).solve()
        rows = np.arange(7)
        assert costs[rows, plain].sum() == costs[rows, broken].sum()

    def test_tie_break_prefers_low_fleet_index(self):
        fleets = FlowNetwork(np.ones((2, 2), dtype=np.int64), [2, 2]).solve()
        assert fleets.tolist() == [0, 0]

    def test_tie_break_minimises_fleet_index_sum(self):
        # optima (0, 2) and (1, 0) cost the same; the smaller index sum wins
        fleets = FlowNetwork(np.array([[1, 1, 9], [1, 9, 1]]), [1, 2, 2]).solve()
        assert fleets.tolist() == [1, 0]

    def test_unplaced_flights_marked(self):
        fleets = FlowNetwork(np.ones((3, 1), dtype=np.int64), [2]).solve()
        assert sorted(fleets.tolist()) == [-1, 0, 0]

    def test_no_negative_cycle_after_solve(self):
        network = FlowNetwork(np.array([[3, 1], [2, 9], [4, 4]]), [2, 1])
        network.solve()
        assert not network.has_negative_cycle()

    def test_negative_costs_rejected(self):
        with pytest.raises(ModelInconsistencyError):
            FlowNetwork(np.array([[-1]]), [1])

    def test_deadline_returns_none(self, frozen_clock):
        assert FlowNetwork(np.ones((2, 2), dtype=np.int64), [1, 1]).solve(deadline=-1.0) is None


class TestSolveBlpExact:
    """Test the per-day min-cost flow solve."""

    def test_two_flight_toy(self, two_flight_toy):
        report = solve_blp_exact(build_blp(two_flight_toy))
        assert report.status == SolveStatus.OPTIMAL
        assert report.objective == pytest.approx(6.00)
        assert report.bound == report.objective
        assert sorted(report.assignment.fleet_of.values()) == [0, 1]

    def test_uncapacitated_takes_row_minima(self):
        costs = [[300, 200, 400], [150, 500, 100], [700, 600, 650]]
        instance = make_instance(costs, [(100, 3), (100, 3), (100, 3)])
        report = solve_blp_exact(build_blp(instance))
        assert report.objective == pytest.approx((200 + 100 + 600) / 100)

    def test_sample_is_feasible(self, sample_instance):
        report = solve_blp_exact(build_blp(sample_instance))
        assert report.status == SolveStatus.OPTIMAL
        assert check_feasibility(sample_instance, report.assignment, ModelKind.BLP) == []

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_brute_force(self, seed):
        instance = random_toy(seed, flights_per_day=5, fleet_count=3, days=2)
        exact = solve_blp_exact(build_blp(instance))
        oracle = brute_force(instance, ModelKind.BLP)
        assert exact.status == oracle.status
        if oracle.status == SolveStatus.OPTIMAL:
            assert exact.objective == pytest.approx(oracle.objective)
            assert check_feasibility(instance, exact.assignment, ModelKind.BLP) == []

    @pytest.mark.parametrize("seed", range(6))
    def test_invariant_under_flight_and_fleet_permutation(self, seed):
        instance = random_toy(seed, flights_per_day=5, fleet_count=3, days=2, max_available=4, penalty_weight=0.3)
        rng = np.random.default_rng(seed)
        flight_order = rng.permutation(len(instance.flights))
        fleet_order = rng.permutation(instance.fleet_count)
        permuted = replace(
            instance,
            fleets=tuple(replace(instance.fleets[old], id=new) for new, old in enumerate(fleet_order)),
            flights=tuple(instance.flights[i] for i in flight_order),
            costs=CostMatrix(tuple(
                tuple(instance.costs.cents[i][old] for old in fleet_order) for i in flight_order
            )),
        )
        original = solve_blp_exact(build_blp(instance))
        moved = solve_blp_exact(build_blp(permuted))
        assert moved.status == original.status
        if original.status == SolveStatus.OPTIMAL:
            assert moved.objective == pytest.approx(original.objective)
            assert check_feasibility(permuted, moved.assignment, ModelKind.BLP) == []

    def test_infeasible_day(self):
        instance = make_instance([[100], [100], [100]], [(150, 1)], days=[1, 2, 2])
        report = solve_blp_exact(build_blp(instance))
        assert report.status == SolveStatus.INFEASIBLE
        assert report.assignment is None
        assert math.isinf(report.objective)
        assert report.stats["infeasible_days"] == [2]

    def test_empty_instance(self):
        report = solve_blp_exact(build_blp(make_instance([], [(150, 1)])))
        assert report.status == SolveStatus.OPTIMAL
        assert report.objective == 0.0
        assert report.assignment.fleet_of == {}

    def test_timeout_fills_days_greedily(self, two_flight_toy, frozen_clock):
        report = solve_blp_exact(build_blp(two_flight_toy), time_limit=1.0)
        assert report.status == SolveStatus.TIMED_OUT
        assert report.assignment.fleet_of == {1: 0, 2: 1}
        assert report.objective == pytest.approx(6.00)
        assert report.bound == pytest.approx(2.00)
        assert report.stats["days_unsolved"] == [1]

    def test_debug_checks(self, mocker, sample_instance):
        mocker.patch.object(Config, "DEBUG_CHECKS", True)
        for problem in build_blp(sample_instance).day_problems:
            assert solve_day(problem) is not None


class TestSolveIlpExact:
    """Test branch and bound on the single-day model."""

    def test_single_flight(self):
        instance = make_instance([[100, 200]], [(150, 1), (150, 1)])
        report = solve_ilp_exact(build_ilp(instance))
        assert report.status == SolveStatus.OPTIMAL
        assert report.objective == pytest.approx(1.00)
        assert report.assignment.fleet_of == {1: 0}
        assert report.assignment.initial[("SYD", 0)] == 1
        assert report.assignment.initial[("MEL", 0)] == 0

    def test_round_trip_reuses_aircraft(self):
        instance = make_instance(
            [[100], [100]], [(150, 2)],
            routes=[("SYD", "MEL"), ("MEL", "SYD")], times=[(480, 540), (600, 660)],
        )
        report = solve_ilp_exact(build_ilp(instance))
        assert report.status == SolveStatus.OPTIMAL
        assert report.assignment.initial == {("MEL", 0): 0, ("SYD", 0): 1}

    def test_no_aircraft_is_infeasible(self):
        instance = make_instance([[100, 200]], [(150, 0), (150, 0)])
        report = solve_ilp_exact(build_ilp(instance))
        assert report.status == SolveStatus.INFEASIBLE
        assert report.assignment is None

    def test_empty_day(self):
        report = solve_ilp_exact(build_ilp(make_instance([], [(150, 1)])))
        assert report.status == SolveStatus.OPTIMAL
        assert report.objective == 0.0

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_exhaustive_oracle(self, seed):
        instance = random_toy(seed, flights_per_day=5, fleet_count=3)
        report = solve_ilp_exact(build_ilp(instance))
        expected = ilp_exhaustive(instance)
        if expected is None:
            assert report.status == SolveStatus.INFEASIBLE
        else:
            assert report.status == SolveStatus.OPTIMAL
            assert round(report.objective * 100) == expected
            assert check_feasibility(instance, report.assignment, ModelKind.ILP) == []
        assert report.stats["nodes_explored"] >= 0

    def test_timeout_without_incumbent(self, two_flight_toy, frozen_clock):
        report = solve_ilp_exact(build_ilp(two_flight_toy), time_limit=1.0)
        assert report.status == SolveStatus.TIMED_OUT
        assert report.assignment is None
        assert report.bound == pytest.approx(6.00)


class TestBruteForce:
    """Test the exhaustive oracle."""

    def test_candidate_count(self):
        instance = make_instance([[100, 200, 300]] * 5, [(150, 5), (150, 5), (150, 5)])
        report = brute_force(instance)
        assert report.stats["candidates"] == 243
        assert report.objective == pytest.approx(5.00)

    def test_refuses_large_search_space(self):
        instance = make_instance([[100, 200]] * 25, [(150, 25), (150, 25)])
        with pytest.raises(InstanceTooLargeError):
            brute_force(instance)

    def test_ilp_agrees_with_branch_and_bound(self):
        for seed in range(10):
            instance = random_toy(seed + 100, flights_per_day=4, fleet_count=3)
            exact = solve_ilp_exact(build_ilp(instance))
            oracle = brute_force(instance, ModelKind.ILP)
            assert exact.status == oracle.status
            if oracle.assignment is not None:
                assert exact.objective == pytest.approx(oracle.objective)

    def test_infeasible_day_reported(self):
        instance = make_instance([[100], [100]], [(150, 1)])
        report = brute_force(instance)
        assert report.status == SolveStatus.INFEASIBLE
        assert report.stats["infeasible_days"] == [1]
