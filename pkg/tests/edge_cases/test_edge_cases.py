"""
Edge case tests for fleetopt.
Empty schedules, unreachable demand, missing aircraft, ties and timeline corners.
"""

import pytest

from src.models.data_models import AnnealConfig, Instance, ModelKind, SolveStatus
from src.services.blp_model import build_blp
from src.services.evaluator import check_feasibility, evaluate_objective
from src.services.exact_solver import brute_force, solve_blp_exact, solve_ilp_exact
from src.services.ilp_model import build_ilp
from src.services.pipeline import BACKENDS, SolvePipeline
from tests.fixtures.factories import make_instance


class TestEmptyInstance:
    """Test an instance with fleets but no flights."""

    @pytest.fixture
    def empty(self):
        return make_instance([], [(150, 1), (120, 2)])

    @pytest.mark.parametrize("backend", BACKENDS)
    @pytest.mark.parametrize("model_kind", [ModelKind.BLP, ModelKind.ILP])
    def test_every_backend(self, empty, backend, model_kind):
        outcome = SolvePipeline().solve(empty, model_kind, backend,
                                        anneal_config=AnnealConfig(sweeps=10, restarts=1))
        assert outcome.report.objective == 0.0
        assert outcome.report.assignment.fleet_of == {}

    def test_counts(self, empty):
        model = build_blp(empty)
        assert (model.variable_count, model.constraint_count) == (0, 0)
        ilp = build_ilp(empty)
        assert (ilp.variable_count, ilp.constraint_count) == (0, 2)


class TestDemandAndCapacity:
    """Test seat mismatch at the extremes."""

    def test_demand_above_every_capacity(self):
        instance = make_instance([[0, 0]], [(100, 1), (150, 1)], demands=[400], penalty_weight=1.0)
        report = solve_blp_exact(build_blp(instance))
        assert report.assignment.fleet_of == {1: 1}
        assert report.objective == pytest.approx(250 ** 2)

    def test_lambda_zero_ignores_seats(self):
        instance = make_instance([[100, 200]], [(100, 1), (400, 1)], demands=[400], penalty_weight=0.0)
        assert solve_blp_exact(build_blp(instance)).assignment.fleet_of == {1: 0}

    def test_lambda_changes_choice(self):
        instance = make_instance([[100, 200]], [(100, 1), (400, 1)], demands=[400], penalty_weight=1.0)
        report = solve_blp_exact(build_blp(instance))
        assert report.assignment.fleet_of == {1: 1}
        assert report.objective == pytest.approx(evaluate_objective(instance, report.assignment))


class TestAvailability:
    """Test fleets without aircraft."""

    def test_zero_availability_fleet_unused(self):
        instance = make_instance([[500, 100], [500, 100]], [(150, 2), (150, 0)])
        report = solve_blp_exact(build_blp(instance))
        assert set(report.assignment.fleet_of.values()) == {0}
        assert check_feasibility(instance, report.assignment, ModelKind.BLP) == []

    def test_exactly_enough_aircraft(self):
        instance = make_instance([[100, 900]] * 3, [(150, 1), (150, 2)])
        report = solve_ilp_exact(build_ilp(instance))
        assert report.status == SolveStatus.OPTIMAL
        assert report.objective == pytest.approx(19.00)

    def test_one_flight_too_many(self):
        instance = make_instance([[100, 900]] * 4, [(150, 1), (150, 2)])
        assert solve_ilp_exact(build_ilp(instance)).status == SolveStatus.INFEASIBLE
        assert brute_force(instance, ModelKind.ILP).status == SolveStatus.INFEASIBLE


class TestTies:
    """Test deterministic tie resolution."""

    def test_exact_and_brute_force_pick_the_same_optimum(self):
        instance = make_instance([[100, 100, 100]] * 3, [(150, 2), (150, 2), (150, 2)])
        exact = solve_blp_exact(build_blp(instance))
        oracle = brute_force(instance)
        assert oracle.assignment.fleet_of == {1: 0, 2: 0, 3: 1}
        assert sorted(exact.assignment.fleet_of.values()) == [0, 0, 1]
        assert exact.objective == oracle.objective

    def test_repeatable(self):
        instance = make_instance([[100, 100]] * 4, [(150, 2), (150, 2)])
        first = solve_blp_exact(build_blp(instance)).assignment.fleet_of
        assert all(solve_blp_exact(build_blp(instance)).assignment.fleet_of == first for _ in range(3))


class TestTimeline:
    """Test timeline corners."""

    def test_turnaround_at_the_same_minute(self):
        instance = make_instance(
            [[100], [100]], [(150, 2)],
            routes=[("SYD", "MEL"), ("MEL", "BNE")], times=[(480, 540), (540, 600)],
        )
        report = solve_ilp_exact(build_ilp(instance))
        assert sum(report.assignment.initial.values()) == 1

    def test_first_and_last_minute(self):
        instance = make_instance(
            [[100], [100]], [(150, 2)],
            routes=[("SYD", "MEL"), ("MEL", "SYD")], times=[(0, 60), (1380, 1439)],
        )
        report = solve_ilp_exact(build_ilp(instance))
        assert report.status == SolveStatus.OPTIMAL
        assert report.assignment.initial[("SYD", 0)] == 1

    def test_days_without_flights(self):
        base = make_instance([[100, 200]], [(150, 1), (150, 1)])
        instance = Instance(base.fleets, base.flights, base.costs, days=frozenset({1, 2, 3}))
        model = build_blp(instance)
        assert model.constraint_count == 1 + 2 * 3
        assert solve_blp_exact(model).status == SolveStatus.OPTIMAL
