"""
Core data models for fleetopt.

All domain values are frozen dataclasses; they are validated on construction
and safe to share between concurrent solver runs.
"""

from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_EVEN
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from ..utils.error_handler import InstanceValidationError


MINUTES_PER_DAY = 1440


class SolveStatus(Enum):
    """Outcome of a solver call."""
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIMED_OUT = "TimedOut"


class ModelKind(Enum):
    """Which fleet assignment formulation a solve targets."""
    BLP = "blp"
    ILP = "ilp"


class PipelineState(Enum):
    """States of the load -> build -> solve pipeline."""
    IDLE = "idle"
    LOADING = "loading_instance"
    BUILDING = "building_model"
    SOLVING = "solving"
    COMPLETE = "complete"
    ERROR = "error"


@dataclass(frozen=True)
class FleetType:
    """Aircraft class with seat capacity Q_j and availability N_j."""
    id: int
    name: str
    capacity: int
    available: int

    def __post_init__(self):
        if self.capacity < 1:
            raise InstanceValidationError(f"fleet {self.name}: capacity must be >= 1, got {self.capacity}")
        if self.available < 0:
            raise InstanceValidationError(f"fleet {self.name}: available must be >= 0, got {self.available}")


@dataclass(frozen=True)
class Flight:
    """Scheduled leg; times are minutes since midnight, day is 1-based."""
    id: int
    origin: str
    destination: str
    departure: int
    arrival: int
    demand: int
    day: int = 1

    def __post_init__(self):
        if self.origin == self.destination:
            raise InstanceValidationError(f"flight {self.id}: origin equals destination ({self.origin})")
        for label, minute in (("departure", self.departure), ("arrival", self.arrival)):
            if not 0 <= minute < MINUTES_PER_DAY:
                raise InstanceValidationError(f"flight {self.id}: {label} {minute} outside [0, 1440)")
        if self.demand < 0:
            raise InstanceValidationError(f"flight {self.id}: demand must be >= 0")


@dataclass(frozen=True)
class CostMatrix:
    """Dense cost[flight position][fleet id] table held in integer cents."""
    cents: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_currency(cls, rows) -> "CostMatrix":
        return cls(tuple(tuple(to_cents(value) for value in row) for row in rows))

    def as_array(self, fleet_count: int) -> np.ndarray:
        if not self.cents:
            return np.zeros((0, fleet_count), dtype=np.int64)
        return np.array(self.cents, dtype=np.int64)


def to_cents(value) -> int:
    """Convert a currency amount (str, Decimal, int or float) to integer cents."""
    amount = value if isinstance(value, Decimal) else Decimal(str(value))
    return int((amount * 100).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


def format_cents(cents: int) -> str:
    """Render cents as a decimal with two fraction digits."""
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"


@dataclass(frozen=True)
class Instance:
    """Fleets, flights, costs and the penalty weight lambda: the solver input."""
    fleets: Tuple[FleetType, ...]
    flights: Tuple[Flight, ...]
    costs: CostMatrix
    days: frozenset = frozenset()
    penalty_weight: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "fleets", tuple(self.fleets))
        object.__setattr__(self, "flights", tuple(self.flights))
        object.__setattr__(self, "days", frozenset(self.days) | {f.day for f in self.flights})

        for index, fleet in enumerate(self.fleets):
            if fleet.id != index:
                raise InstanceValidationError(f"fleet ids must be dense 0..{len(self.fleets) - 1}; got {fleet.id} at {index}")
        if self.penalty_weight < 0:
            raise InstanceValidationError(f"lambda must be >= 0, got {self.penalty_weight}")

        seen = {}
        for flight in self.flights:
            if flight.id in seen:
                raise InstanceValidationError(
                    f"duplicate flight id {flight.id} (days {seen[flight.id]} and {flight.day})"
                )
            seen[flight.id] = flight.day

        if len(self.costs.cents) != len(self.flights):
            raise InstanceValidationError(
                f"cost matrix has {len(self.costs.cents)} rows for {len(self.flights)} flights"
            )
        for flight, row in zip(self.flights, self.costs.cents):
            if len(row) != len(self.fleets):
                raise InstanceValidationError(f"flight {flight.id}: expected {len(self.fleets)} cost entries, got {len(row)}")
            if any(value < 0 for value in row):
                raise InstanceValidationError(f"flight {flight.id}: negative cost entry")

    @property
    def fleet_count(self) -> int:
        return len(self.fleets)

    @property
    def sorted_days(self) -> Tuple[int, ...]:
        return tuple(sorted(self.days))

    @cached_property
    def flight_index(self) -> Dict[int, int]:
        """Flight id -> position in ``flights``."""
        return {flight.id: pos for pos, flight in enumerate(self.flights)}

    def flights_on(self, day: int) -> Tuple[int, ...]:
        """Positions of the flights of day d (F_d), in instance order."""
        return tuple(pos for pos, flight in enumerate(self.flights) if flight.day == day)

    def penalty_cents(self, flight_pos: int, fleet_id: int) -> int:
        """lambda * (Q_j - D_i)^2 in cents, rounded half-even."""
        mismatch = self.fleets[fleet_id].capacity - self.flights[flight_pos].demand
        weight = Decimal(repr(float(self.penalty_weight)))
        return int((weight * 100 * mismatch * mismatch).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))

    @cached_property
    def effective_costs(self) -> np.ndarray:
        """Read-only (flights x fleets) array of C + lambda (Q - D)^2 in cents."""
        table = self.costs.as_array(self.fleet_count).copy()
        for pos in range(len(self.flights)):
            for fleet_id in range(self.fleet_count):
                table[pos, fleet_id] += self.penalty_cents(pos, fleet_id)
        table.flags.writeable = False
        return table


@dataclass(frozen=True)
class Assignment:
    """Fleet per flight id (the x variables) plus optional grounded counts (ILP)."""
    fleet_of: Mapping[int, int]
    grounded: Optional[Mapping[Tuple[int, int], int]] = None
    initial: Optional[Mapping[Tuple[str, int], int]] = None

    def __post_init__(self):
        for values in (self.grounded, self.initial):
            if values and any(count < 0 for count in values.values()):
                raise InstanceValidationError("grounded aircraft counts must be >= 0")

    def __hash__(self):
        return hash(tuple(sorted(self.fleet_of.items())))

    def fleet_vector(self, instance: Instance) -> np.ndarray:
        """Fleet id per flight position; -1 where the flight is unassigned."""
        return np.array([self.fleet_of.get(f.id, -1) for f in instance.flights], dtype=np.int64)

    @classmethod
    def from_vector(cls, instance: Instance, fleets, **extra) -> "Assignment":
        return cls({flight.id: int(j) for flight, j in zip(instance.flights, fleets)}, **extra)


@dataclass(frozen=True)
class Violation:
    """One violated constraint: family, index within the family, and slack amount."""
    family: str
    index: Tuple
    amount: int

    def describe(self) -> str:
        return f"{self.family}{list(self.index)} exceeds by {self.amount}"


@dataclass(frozen=True)
class SolveReport:
    """Carrier for a solver outcome; objective and bound are in currency units."""
    objective: float
    status: SolveStatus
    wall_time: float
    assignment: Optional[Assignment] = None
    bound: Optional[float] = None
    model_kind: Optional[ModelKind] = None
    stats: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status == SolveStatus.INFEASIBLE and self.assignment is not None:
            raise InstanceValidationError("an Infeasible report cannot carry an assignment")
        if self.status == SolveStatus.OPTIMAL:
            if self.bound is None or abs(self.objective - self.bound) > 1e-6 * max(1.0, abs(self.objective)):
                raise InstanceValidationError(
                    f"Optimal report needs bound == objective (objective={self.objective}, bound={self.bound})"
                )

    @property
    def has_solution(self) -> bool:
        return self.status in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE) and self.assignment is not None


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of the seeded synthetic instance generator."""
    flights_per_day: int
    days: int = 7
    fleet_spec: Tuple[Tuple[str, int, int], ...] = (
        ("A330", 159, 10),
        ("A220", 192, 15),
        ("B737", 142, 15),
        ("B717", 165, 8),
    )
    airports: Tuple[str, ...] = ("SYD", "MEL", "HBA", "OOL", "DRW", "ADA", "BNE", "CBR", "PER")
    demand_range: Tuple[int, int] = (100, 210)
    cost_range: Tuple[Decimal, Decimal] = (Decimal("4000.00"), Decimal("6500.00"))
    seed: int = 0
    penalty_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "fleet_spec", tuple(tuple(spec) for spec in self.fleet_spec))
        object.__setattr__(self, "airports", tuple(self.airports))
        object.__setattr__(self, "cost_range", tuple(Decimal(str(v)) for v in self.cost_range))
        if self.flights_per_day < 1 or self.days < 1:
            raise InstanceValidationError("flights_per_day and days must be >= 1")
        low, high = self.demand_range
        if not 0 <= low <= high <= 400:
            raise InstanceValidationError(f"demand_range {self.demand_range} must lie within [0, 400]")
        cost_low, cost_high = self.cost_range
        if not 0 <= cost_low <= cost_high:
            raise InstanceValidationError(f"cost_range {self.cost_range} must be non-negative and ordered")

    @property
    def label(self) -> str:
        return f"({self.flights_per_day},{len(self.fleet_spec)},{self.days})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "flights_per_day": self.flights_per_day,
            "days": self.days,
            "fleet_spec": [list(spec) for spec in self.fleet_spec],
            "airports": list(self.airports),
            "demand_range": list(self.demand_range),
            "cost_range": [str(v) for v in self.cost_range],
            "seed": self.seed,
            "lambda": self.penalty_weight,
        }


@dataclass(frozen=True)
class AnnealConfig:
    """
    Sampler settings.

    ``sweeps=None`` derives 2000 * sqrt(bits), capped by Config. With no beta
    pair the geometric schedule is derived from the QUBO's energy scales;
    a given pair is used as absolute inverse temperatures. ``seed`` may be any
    64-bit value: the sampler takes a 32-bit seed, so the two halves are
    folded together by xor. ``polish`` adds the local-search pass after repair.
    """
    sweeps: Optional[int] = None
    restarts: int = 8
    beta_start: Optional[float] = None
    beta_end: Optional[float] = None
    seed: int = 0
    repair: bool = True
    polish: bool = False
    time_limit: Optional[float] = None

    def __post_init__(self):
        if self.sweeps is not None and self.sweeps < 1:
            raise InstanceValidationError("sweeps must be >= 1")
        if self.restarts < 1:
            raise InstanceValidationError("restarts must be >= 1")
        if (self.beta_start is None) != (self.beta_end is None):
            raise InstanceValidationError("beta_start and beta_end are given together or not at all")
        if self.beta_start is not None and not 0 < self.beta_start < self.beta_end:
            raise InstanceValidationError("beta schedule needs 0 < beta_start < beta_end")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sweeps": self.sweeps,
            "restarts": self.restarts,
            "beta_start": self.beta_start,
            "beta_end": self.beta_end,
            "seed": self.seed,
            "repair": self.repair,
            "polish": self.polish,
            "time_limit": self.time_limit,
        }


@dataclass
class BenchRow:
    """One line of the exact vs anneal comparison table; ``timings`` holds the run-dependent measurements."""
    label: str
    variables: int
    constraints: int
    total_flights: int
    exact_cost: Optional[float] = None
    anneal_cost: Optional[float] = None
    exact_status: Optional[SolveStatus] = None
    anneal_status: Optional[SolveStatus] = None
    exact_time: float = 0.0
    anneal_time: float = 0.0
    seed: int = 0
    config: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def gap(self) -> Optional[float]:
        """(anneal - exact) / exact, computed from the reported costs."""
        if self.exact_cost is None or self.anneal_cost is None or self.exact_cost == 0:
            return None
        return (self.anneal_cost - self.exact_cost) / self.exact_cost
