"""
Multi-day BLP model.

The seat-mismatch penalty is folded into per-variable coefficients at build
time, so every day is an independent transportation problem: flights of the
day each take exactly one fleet, and fleet j serves at most N_j of them.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..models.data_models import Instance
from ..utils.error_handler import InstanceValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DayProblem:
    """Transportation subproblem of one day; costs are in cents."""
    day: int
    flight_ids: Tuple[int, ...]
    positions: Tuple[int, ...]
    effective_cost: np.ndarray
    fleet_caps: Tuple[int, ...]

    def __post_init__(self):
        if not self.flight_ids:
            raise InstanceValidationError(f"day {self.day}: a day problem needs at least one flight")
        if self.effective_cost.shape != (len(self.flight_ids), len(self.fleet_caps)):
            raise InstanceValidationError(
                f"day {self.day}: cost table shape {self.effective_cost.shape} does not match "
                f"{len(self.flight_ids)} flights x {len(self.fleet_caps)} fleets"
            )
        if np.any(self.effective_cost < 0):
            raise InstanceValidationError(f"day {self.day}: negative effective cost")
        self.effective_cost.flags.writeable = False

    def __hash__(self):
        return hash((self.day, self.flight_ids))

    @property
    def flight_count(self) -> int:
        return len(self.flight_ids)

    @property
    def fleet_count(self) -> int:
        return len(self.fleet_caps)

    @property
    def is_capacity_feasible(self) -> bool:
        """Sum of N_j covers the day's flights."""
        return sum(self.fleet_caps) >= self.flight_count

    def cost_of(self, fleets) -> int:
        """Transportation objective, in cents, of a fleet vector for this day."""
        fleets = np.asarray(fleets, dtype=np.int64)
        return int(self.effective_cost[np.arange(self.flight_count), fleets].sum())


@dataclass(frozen=True)
class BlpModel:
    instance: Instance
    day_problems: Tuple[DayProblem, ...]
    variable_count: int
    constraint_count: int

    @property
    def fleet_count(self) -> int:
        return self.instance.fleet_count

    @property
    def infeasible_days(self) -> Tuple[int, ...]:
        return tuple(p.day for p in self.day_problems if not p.is_capacity_feasible)

    @property
    def effective_cost_matrix(self) -> np.ndarray:
        return self.instance.effective_costs

    def cap_groups(self) -> List[np.ndarray]:
        """Flight positions sharing one set of fleet caps, one group per day."""
        return [np.asarray(p.positions, dtype=np.int64) for p in self.day_problems]


def build_blp(instance: Instance) -> BlpModel:
    """
    Build the BLP: one DayProblem per non-empty day.

    Counters use every day in the instance, so a day without flights still
    contributes its eta fleet-cap rows.
    """
    table = instance.effective_costs
    caps = tuple(fleet.available for fleet in instance.fleets)
    problems = []
    for day in instance.sorted_days:
        positions = instance.flights_on(day)
        if not positions:
            continue
        problems.append(DayProblem(
            day=day,
            flight_ids=tuple(instance.flights[pos].id for pos in positions),
            positions=positions,
            effective_cost=table[list(positions)],
            fleet_caps=caps,
        ))

    eta = instance.fleet_count
    model = BlpModel(
        instance=instance,
        day_problems=tuple(problems),
        variable_count=len(instance.flights) * eta,
        constraint_count=len(instance.flights) + eta * len(instance.days),
    )
    for day in model.infeasible_days:
        logger.warning("day %d has more flights than available aircraft; the model is infeasible", day)
    logger.debug("BLP built: %d days, %d variables, %d constraints",
                 len(problems), model.variable_count, model.constraint_count)
    return model


def decompose_by_day(model: BlpModel) -> List[DayProblem]:
    """Independent per-day subproblems, in day order."""
    return list(model.day_problems)
