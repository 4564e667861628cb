"""
Objective evaluation, feasibility checking and search-space accounting
shared by all solvers.
"""

import math
from collections import Counter, defaultdict
from typing import Dict, List, Optional, Tuple

from ..models.data_models import Assignment, Instance, ModelKind, Violation
from ..utils.error_handler import ModelInconsistencyError
from .ilp_model import build_timeline, minimal_initials, propagate_grounded


def objective_cents(instance: Instance, assignment: Assignment) -> int:
    """Sum of effective costs (C + lambda (Q - D)^2) in integer cents."""
    table = instance.effective_costs
    total = 0
    for pos, flight in enumerate(instance.flights):
        fleet_id = assignment.fleet_of.get(flight.id)
        if fleet_id is None:
            raise ModelInconsistencyError(f"assignment has no fleet for flight {flight.id}")
        if not 0 <= fleet_id < instance.fleet_count:
            raise ModelInconsistencyError(f"flight {flight.id}: no cost entry for fleet {fleet_id}")
        total += int(table[pos, fleet_id])
    unknown = set(assignment.fleet_of) - set(instance.flight_index)
    if unknown:
        raise ModelInconsistencyError(f"assignment references unknown flights {sorted(unknown)}")
    return total


def evaluate_objective(instance: Instance, assignment: Assignment) -> float:
    """
    Objective of a complete assignment in currency units.

    Sum over flights of C[i, j(i)] + lambda * (Q_j(i) - D_i)^2.
    """
    return objective_cents(instance, assignment) / 100


def penalty_sum(instance: Instance, assignment: Assignment) -> int:
    """Sum over flights of (Q_j(i) - D_i)^2, the coefficient of lambda in the objective."""
    return sum(
        (instance.fleets[assignment.fleet_of[f.id]].capacity - f.demand) ** 2
        for f in instance.flights
    )


def search_space_log2(instance: Instance) -> float:
    """log2 of eta^M, M being the total flight count across days."""
    flights = len(instance.flights)
    if flights == 0:
        return 0.0
    if instance.fleet_count < 1:
        raise ModelInconsistencyError("search space is undefined without fleet types")
    return flights * math.log2(instance.fleet_count)


def _one_hot_violations(instance: Instance, assignment: Assignment) -> List[Violation]:
    violations = []
    for flight in instance.flights:
        fleet_id = assignment.fleet_of.get(flight.id)
        if fleet_id is None or not 0 <= fleet_id < instance.fleet_count:
            violations.append(Violation("one_hot", (flight.id,), 1))
    return violations


def _cap_violations(instance: Instance, assignment: Assignment, positions, index_prefix: Tuple) -> List[Violation]:
    counts = Counter(
        assignment.fleet_of.get(instance.flights[pos].id) for pos in positions
    )
    violations = []
    for fleet in instance.fleets:
        excess = counts.get(fleet.id, 0) - fleet.available
        if excess > 0:
            violations.append(Violation("fleet_cap", index_prefix + (fleet.id,), excess))
    return violations


def _grounded_violations(instance: Instance, assignment: Assignment) -> List[Violation]:
    network = build_timeline(list(instance.flights))
    violations = []

    if assignment.grounded is not None and assignment.initial is not None:
        for (node, fleet_id), count in sorted(assignment.grounded.items()):
            if count < 0:
                violations.append(Violation("grounded_nonneg", (node, fleet_id), -count))
        for airport, chain in network.airport_chains.items():
            for fleet in instance.fleets:
                previous = assignment.initial.get((airport, fleet.id), 0)
                for node in chain:
                    flight_id = network.flight_at(node)
                    delta = 0
                    if assignment.fleet_of.get(flight_id) == fleet.id:
                        delta = 1 if network.nodes[node].kind == "arrival" else -1
                    current = assignment.grounded.get((node, fleet.id), 0)
                    residual = previous + delta - current
                    if residual != 0:
                        violations.append(Violation("balance", (node, fleet.id), abs(residual)))
                    previous = current
        initial = dict(assignment.initial)
    elif assignment.initial is not None:
        initial = dict(assignment.initial)
        result = propagate_grounded(network, assignment, initial, instance.fleet_count)
        if result.negative_at is not None:
            node, fleet_id = result.negative_at
            violations.append(Violation("grounded_nonneg", (node, fleet_id), -result.grounded[(node, fleet_id)]))
    else:
        initial = minimal_initials(network, assignment, instance.fleet_count)

    totals: Dict[int, int] = defaultdict(int)
    for (_, fleet_id), count in initial.items():
        totals[fleet_id] += count
    for fleet in instance.fleets:
        excess = totals.get(fleet.id, 0) - fleet.available
        if excess > 0:
            violations.append(Violation("initial_availability", (fleet.id,), excess))
    return violations


def check_feasibility(instance: Instance, assignment: Assignment,
                      model: ModelKind = ModelKind.BLP, day: Optional[int] = None) -> List[Violation]:
    """
    List the constraint violations of an assignment; empty means feasible.

    BLP checks one-hot rows and per-day fleet caps (all days, or only ``day``).
    ILP checks one-hot rows, the fleet caps and the aircraft balance system:
    when the assignment carries grounded/initial counts those are checked row
    by row, otherwise the minimal initial placement is derived and compared
    with the availability N_j.
    """
    violations = _one_hot_violations(instance, assignment)
    if violations:
        return violations

    if model == ModelKind.BLP:
        days = [day] if day is not None else list(instance.sorted_days)
        for d in days:
            violations.extend(_cap_violations(instance, assignment, instance.flights_on(d), (d,)))
        return violations

    violations.extend(_cap_violations(instance, assignment, range(len(instance.flights)), ()))
    violations.extend(_grounded_violations(instance, assignment))
    return violations
