"""
Unit tests for objective evaluation and feasibility checking.
"""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from src.models.data_models import Assignment, CostMatrix, ModelKind
from src.services.evaluator import (
    check_feasibility,
    evaluate_objective,
    objective_cents,
    penalty_sum,
    search_space_log2,
)
from src.utils.error_handler import ModelInconsistencyError
from tests.fixtures.factories import make_instance, random_toy


class TestObjective:
    """Test evaluate_objective and its parts."""

    def test_sample_flight_on_a330(self, sample_instance):
        """4690.40 + 1 * (159 - 157)^2 = 4694.40."""
        pos = sample_instance.flight_index[11111]
        assignment = Assignment({f.id: 0 for f in sample_instance.flights})
        assert sample_instance.effective_costs[pos, 0] / 100 == pytest.approx(4694.40)
        assert objective_cents(sample_instance, assignment) == int(sample_instance.effective_costs[:, 0].sum())

    def test_zero_lambda_is_plain_cost_sum(self):
        instance = make_instance([[100, 200], [300, 50]], [(150, 2), (100, 2)], demands=[10, 400])
        assignment = Assignment({1: 1, 2: 1})
        assert evaluate_objective(instance, assignment) == 2.50

    def test_matches_independent_recomputation(self):
        instance = random_toy(5, flights_per_day=3, fleet_count=2, penalty_weight=0.7)
        rng = np.random.default_rng(1)
        for _ in range(10):
            fleets = rng.integers(0, 2, 3)
            assignment = Assignment.from_vector(instance, fleets)
            expected = 0
            for pos, flight in enumerate(instance.flights):
                j = int(fleets[pos])
                mismatch = instance.fleets[j].capacity - flight.demand
                expected += instance.costs.cents[pos][j] + round(0.7 * 100 * mismatch ** 2)
            assert objective_cents(instance, assignment) == expected

    def test_flight_order_does_not_matter(self):
        instance = random_toy(8, flights_per_day=6, fleet_count=3, days=2, penalty_weight=0.4)
        rng = np.random.default_rng(8)
        order = rng.permutation(len(instance.flights))
        shuffled = replace(
            instance,
            flights=tuple(instance.flights[i] for i in order),
            costs=CostMatrix(tuple(instance.costs.cents[i] for i in order)),
        )
        for _ in range(5):
            assignment = Assignment.from_vector(instance, rng.integers(0, 3, len(instance.flights)))
            assert evaluate_objective(shuffled, assignment) == evaluate_objective(instance, assignment)

    def test_affine_in_lambda(self):
        base = random_toy(9, flights_per_day=5, fleet_count=3)
        assignment = Assignment.from_vector(base, np.arange(5) % 3)
        at = {weight: objective_cents(replace(base, penalty_weight=weight), assignment) for weight in (0, 1, 2.5)}
        slope = at[1] - at[0]
        assert slope == 100 * penalty_sum(base, assignment)
        assert at[2.5] == at[0] + 2.5 * slope

    def test_objective_is_cost_plus_lambda_penalty(self, sample_instance):
        assignment = Assignment({f.id: 2 for f in sample_instance.flights})
        costs = sum(row[2] for row in sample_instance.costs.cents)
        assert objective_cents(sample_instance, assignment) == costs + 100 * penalty_sum(sample_instance, assignment)

    def test_missing_flight_raises(self, two_flight_toy):
        with pytest.raises(ModelInconsistencyError, match="no fleet for flight 2"):
            objective_cents(two_flight_toy, Assignment({1: 0}))

    def test_unknown_fleet_raises(self, two_flight_toy):
        with pytest.raises(ModelInconsistencyError):
            objective_cents(two_flight_toy, Assignment({1: 0, 2: 7}))


class TestFeasibility:
    """Test check_feasibility for both models."""

    def test_fleet_cap_violation(self, two_flight_toy):
        violations = check_feasibility(two_flight_toy, Assignment({1: 0, 2: 0}))
        assert len(violations) == 1
        assert violations[0].family == "fleet_cap"
        assert violations[0].index == (1, 0)
        assert violations[0].amount == 1

    def test_total_assignment_has_no_one_hot_violations(self, two_flight_toy):
        violations = check_feasibility(two_flight_toy, Assignment({1: 0, 2: 1}))
        assert violations == []

    def test_missing_flight_is_one_hot_violation(self, two_flight_toy):
        violations = check_feasibility(two_flight_toy, Assignment({1: 0}))
        assert [v.family for v in violations] == ["one_hot"]

    def test_single_day_check(self):
        instance = make_instance([[1], [1], [1]], [(100, 1)], days=[1, 1, 2])
        assignment = Assignment({1: 0, 2: 0, 3: 0})
        assert check_feasibility(instance, assignment, day=2) == []
        assert len(check_feasibility(instance, assignment, day=1)) == 1

    def test_matches_direct_recheck(self):
        instance = random_toy(9, flights_per_day=6, fleet_count=3, days=1)
        for fleets in itertools.islice(itertools.product(range(3), repeat=6), 0, 729, 7):
            assignment = Assignment.from_vector(instance, fleets)
            counts = np.bincount(fleets, minlength=3)
            expected = {j: int(counts[j] - f.available) for j, f in enumerate(instance.fleets) if counts[j] > f.available}
            found = {v.index[1]: v.amount for v in check_feasibility(instance, assignment)}
            assert found == expected

    def test_ilp_departure_needs_initial_aircraft(self):
        instance = make_instance([[1]], [(100, 0)])
        violations = check_feasibility(instance, Assignment({1: 0}), ModelKind.ILP)
        assert [v.family for v in violations] == ["fleet_cap", "initial_availability"]

    def test_ilp_explicit_initials_checked(self):
        instance = make_instance([[1]], [(100, 1)])
        assignment = Assignment({1: 0}, initial={("SYD", 0): 0})
        violations = check_feasibility(instance, assignment, ModelKind.ILP)
        assert [v.family for v in violations] == ["grounded_nonneg"]

    def test_ilp_wrong_grounded_counts_break_balance(self):
        instance = make_instance([[1]], [(100, 1)])
        # node 0 is the SYD departure, node 1 the MEL arrival
        grounded = {(0, 0): 1, (1, 0): 1}
        assignment = Assignment({1: 0}, grounded=grounded, initial={("SYD", 0): 1})
        families = [v.family for v in check_feasibility(instance, assignment, ModelKind.ILP)]
        assert "balance" in families


class TestSearchSpace:
    """Test search_space_log2."""

    def test_week_of_46_flights(self, generated_week):
        assert search_space_log2(generated_week) == pytest.approx(644.0)

    def test_single_fleet(self):
        assert search_space_log2(make_instance([[1], [2]], [(100, 2)])) == 0.0

    def test_three_fleets_five_flights(self):
        instance = make_instance([[1, 1, 1]] * 5, [(100, 5)] * 3)
        assert search_space_log2(instance) == pytest.approx(math.log2(243))
        assert search_space_log2(instance) == pytest.approx(7.9248, abs=1e-4)

    def test_adds_up_over_days(self):
        instance = random_toy(10, flights_per_day=4, fleet_count=3, days=3)
        parts = []
        for day in instance.sorted_days:
            positions = instance.flights_on(day)
            parts.append(replace(
                instance,
                flights=tuple(instance.flights[pos] for pos in positions),
                costs=CostMatrix(tuple(instance.costs.cents[pos] for pos in positions)),
                days=frozenset({day}),
            ))
        assert len(parts) == 3
        assert sum(search_space_log2(part) for part in parts) == pytest.approx(search_space_log2(instance))
