"""
Instance factories shared by the test suite.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from src.models.data_models import CostMatrix, FleetType, Flight, Instance

TOY_AIRPORTS = ("SYD", "MEL", "BNE")


def make_fleets(spec: Sequence[Tuple[int, int]]) -> Tuple[FleetType, ...]:
    """Fleets F0, F1, ... from (capacity, available) pairs."""
    return tuple(FleetType(j, f"F{j}", capacity, available) for j, (capacity, available) in enumerate(spec))


def make_instance(cost_cents: Sequence[Sequence[int]], fleet_spec: Sequence[Tuple[int, int]],
                  demands: Optional[Sequence[int]] = None, days: Optional[Sequence[int]] = None,
                  routes: Optional[Sequence[Tuple[str, str]]] = None,
                  times: Optional[Sequence[Tuple[int, int]]] = None,
                  penalty_weight: float = 0.0) -> Instance:
    """
    Hand-written instance; by default every flight is SYD->MEL 08:00-09:00 on day 1
    and lambda is 0, so effective costs equal the cost table.
    """
    n = len(cost_cents)
    demands = demands or [100] * n
    days = days or [1] * n
    routes = routes or [("SYD", "MEL")] * n
    times = times or [(480, 540)] * n
    flights = [
        Flight(i + 1, routes[i][0], routes[i][1], times[i][0], times[i][1], demands[i], days[i])
        for i in range(n)
    ]
    return Instance(make_fleets(fleet_spec), flights, CostMatrix(tuple(tuple(r) for r in cost_cents)),
                    penalty_weight=penalty_weight)


def random_toy(seed: int, flights_per_day: int, fleet_count: int, days: int = 1,
               airports: Sequence[str] = TOY_AIRPORTS, max_available: int = 3,
               penalty_weight: float = 0.0) -> Instance:
    """Small seeded instance with random routes, times, demands, costs and availabilities."""
    rng = np.random.default_rng(seed)
    fleets = tuple(
        FleetType(j, f"F{j}", int(rng.integers(100, 200)), int(rng.integers(0, max_available + 1)))
        for j in range(fleet_count)
    )
    flights = []
    rows = []
    for day in range(1, days + 1):
        for _ in range(flights_per_day):
            origin, destination = rng.choice(len(airports), 2, replace=False)
            departure = 360 + 5 * int(rng.integers(0, 150))
            arrival = departure + 5 * int(rng.integers(12, 37))
            flights.append(Flight(len(flights) + 1, airports[origin], airports[destination],
                                  departure, arrival, int(rng.integers(100, 200)), day))
            rows.append(tuple(int(c) for c in rng.integers(1000, 5000, fleet_count)))
    return Instance(fleets, flights, CostMatrix(tuple(rows)), penalty_weight=penalty_weight, seed=seed)
