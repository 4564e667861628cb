"""
Single-day ILP model with aircraft balance.

Builds the timeline node network (one node per flight event, chained per
airport in time order), the arrival/departure incidence, and the grounded
aircraft bookkeeping: G_kj = G_(k-1)j + arrivals - departures along each
airport chain, starting from an initial placement G_0(airport, j).
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..models.data_models import Assignment, Flight, Instance
from ..utils.error_handler import ModelInconsistencyError

logger = logging.getLogger(__name__)

ARRIVAL = "arrival"
DEPARTURE = "departure"

# arrivals sort before departures at equal times
_KIND_RANK = {ARRIVAL: 0, DEPARTURE: 1}


@dataclass(frozen=True)
class TimelineNode:
    airport: str
    time: int
    kind: str
    flight_id: int


@dataclass(frozen=True)
class TimelineNetwork:
    """Event nodes (the node set M) with incidence and per-airport chains."""
    nodes: Tuple[TimelineNode, ...]
    arrival_node: Mapping[int, int]
    departure_node: Mapping[int, int]
    airport_chains: Mapping[str, Tuple[int, ...]]

    def __hash__(self):
        return hash(self.nodes)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def airports(self) -> Tuple[str, ...]:
        return tuple(self.airport_chains)

    def flight_at(self, node: int) -> int:
        return self.nodes[node].flight_id

    def a(self, flight_id: int, node: int) -> int:
        """a_ik: 1 when flight i arrives at node k."""
        return int(self.arrival_node.get(flight_id) == node)

    def b(self, flight_id: int, node: int) -> int:
        """b_ik: 1 when flight i departs at node k."""
        return int(self.departure_node.get(flight_id) == node)

    def incidence_matrices(self, flight_ids: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Dense (flights x nodes) arrival and departure incidence arrays."""
        arrivals = np.zeros((len(flight_ids), self.node_count), dtype=np.int8)
        departures = np.zeros_like(arrivals)
        for row, flight_id in enumerate(flight_ids):
            arrivals[row, self.arrival_node[flight_id]] = 1
            departures[row, self.departure_node[flight_id]] = 1
        return arrivals, departures

    def previous_node(self, node: int) -> Optional[int]:
        """Predecessor in the node's airport chain; None for the first node."""
        chain = self.airport_chains[self.nodes[node].airport]
        position = chain.index(node)
        return chain[position - 1] if position > 0 else None


def build_timeline(flights: Sequence[Flight]) -> TimelineNetwork:
    """
    Build the event network of one day.

    Nodes are ordered globally by (time, arrival before departure, airport,
    flight id); each airport chain is the subsequence of its own nodes.
    """
    days = {flight.day for flight in flights}
    if len(days) > 1:
        raise ModelInconsistencyError(f"timeline needs flights of a single day, got days {sorted(days)}")

    events = []
    for flight in flights:
        events.append(TimelineNode(flight.origin, flight.departure, DEPARTURE, flight.id))
        events.append(TimelineNode(flight.destination, flight.arrival, ARRIVAL, flight.id))
    events.sort(key=lambda n: (n.time, _KIND_RANK[n.kind], n.airport, n.flight_id))

    arrival_node: Dict[int, int] = {}
    departure_node: Dict[int, int] = {}
    chains: Dict[str, List[int]] = defaultdict(list)
    for index, node in enumerate(events):
        (arrival_node if node.kind == ARRIVAL else departure_node)[node.flight_id] = index
        chains[node.airport].append(index)

    return TimelineNetwork(
        nodes=tuple(events),
        arrival_node=arrival_node,
        departure_node=departure_node,
        airport_chains={airport: tuple(chains[airport]) for airport in sorted(chains)},
    )


@dataclass(frozen=True)
class GroundedResult:
    """Outcome of forward propagation of grounded aircraft along the chains."""
    grounded: Dict[Tuple[int, int], int]
    end_of_day: Dict[Tuple[str, int], int]
    negative_at: Optional[Tuple[int, int]]

    @property
    def feasible(self) -> bool:
        return self.negative_at is None


def _node_delta(network: TimelineNetwork, node: int, fleet_of: Mapping[int, int], fleet_id: int) -> int:
    info = network.nodes[node]
    if fleet_of.get(info.flight_id) != fleet_id:
        return 0
    return 1 if info.kind == ARRIVAL else -1


def propagate_grounded(network: TimelineNetwork, assignment: Assignment,
                       initial: Mapping[Tuple[str, int], int],
                       fleet_count: Optional[int] = None) -> GroundedResult:
    """
    Compute every G_kj by forward recursion from ``initial``.

    Reports the first node (lowest index, then fleet) with a negative count,
    and the end-of-day count per airport and fleet.
    """
    if fleet_count is None:
        fleet_ids = set(assignment.fleet_of.values()) | {j for _, j in initial}
        fleet_count = max(fleet_ids, default=-1) + 1

    grounded: Dict[Tuple[int, int], int] = {}
    end_of_day: Dict[Tuple[str, int], int] = {}
    negative_at: Optional[Tuple[int, int]] = None
    for airport, chain in network.airport_chains.items():
        for fleet_id in range(fleet_count):
            running = initial.get((airport, fleet_id), 0)
            for node in chain:
                running += _node_delta(network, node, assignment.fleet_of, fleet_id)
                grounded[(node, fleet_id)] = running
                if running < 0 and (negative_at is None or (node, fleet_id) < negative_at):
                    negative_at = (node, fleet_id)
            end_of_day[(airport, fleet_id)] = running
    return GroundedResult(grounded, end_of_day, negative_at)


def minimal_initials(network: TimelineNetwork, assignment: Assignment,
                     fleet_count: int) -> Dict[Tuple[str, int], int]:
    """
    Smallest feasible initial placement per airport and fleet.

    For each chain it is the largest prefix excess of departures over
    arrivals; chains are independent, so this is the unique minimum.
    """
    initial: Dict[Tuple[str, int], int] = {}
    for airport, chain in network.airport_chains.items():
        for fleet_id in range(fleet_count):
            balance = 0
            deficit = 0
            for node in chain:
                balance += _node_delta(network, node, assignment.fleet_of, fleet_id)
                deficit = max(deficit, -balance)
            initial[(airport, fleet_id)] = deficit
    return initial


@dataclass(frozen=True)
class IlpModel:
    """Single-day model over an event timeline: one-hot rows, fleet caps and aircraft balance."""
    instance: Instance
    network: TimelineNetwork
    fleet_caps: Tuple[int, ...]
    flight_ids: Tuple[int, ...]

    @property
    def fleet_count(self) -> int:
        return len(self.fleet_caps)

    @property
    def effective_cost(self) -> np.ndarray:
        return self.instance.effective_costs

    @cached_property
    def x_vars(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((pos, j) for pos in range(len(self.flight_ids)) for j in range(self.fleet_count))

    @cached_property
    def g_vars(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((node, j) for node in range(self.network.node_count) for j in range(self.fleet_count))

    @cached_property
    def initial_vars(self) -> Tuple[Tuple[str, int], ...]:
        return tuple((airport, j) for airport in self.network.airports for j in range(self.fleet_count))

    @property
    def variable_count(self) -> int:
        return len(self.x_vars) + len(self.g_vars)

    @property
    def initial_variable_count(self) -> int:
        return len(self.initial_vars)

    @property
    def constraint_count(self) -> int:
        """One-hot rows + fleet cap rows + one balance row per (node, fleet)."""
        return len(self.flight_ids) + self.fleet_count + self.network.node_count * self.fleet_count

    @property
    def initial_constraint_count(self) -> int:
        """Rows sum_airports G_0(airport, j) <= N_j."""
        return self.fleet_count

    def cap_groups(self) -> List[np.ndarray]:
        """Flight positions sharing one set of fleet caps (the whole day)."""
        return [np.arange(len(self.flight_ids))] if self.flight_ids else []

    def balance_rows(self) -> Iterator[Tuple[int, int, Tuple, int, int]]:
        """
        Yield (node, fleet, previous G variable, flight position, sign) per
        balance row: previous + sign * x[flight, fleet] - G[node, fleet] = 0.
        The previous variable is ("G", node', j) or ("G0", airport, j).
        """
        index = self.instance.flight_index
        for node_id, node in enumerate(self.network.nodes):
            previous = self.network.previous_node(node_id)
            sign = 1 if node.kind == ARRIVAL else -1
            for j in range(self.fleet_count):
                prev_var = ("G0", node.airport, j) if previous is None else ("G", previous, j)
                yield node_id, j, prev_var, index[node.flight_id], sign

    def assignment_for(self, fleets: Sequence[int]) -> Assignment:
        """Assignment with minimal initials and the grounded counts they induce."""
        fleet_of = {flight_id: int(j) for flight_id, j in zip(self.flight_ids, fleets)}
        bare = Assignment(fleet_of)
        initial = minimal_initials(self.network, bare, self.fleet_count)
        result = propagate_grounded(self.network, bare, initial, self.fleet_count)
        return Assignment(fleet_of, grounded=result.grounded, initial=initial)

    def initial_excess(self, fleets: Sequence[int]) -> Dict[int, int]:
        """Fleets whose minimal initial placement exceeds N_j, with the excess."""
        fleet_of = {flight_id: int(j) for flight_id, j in zip(self.flight_ids, fleets)}
        initial = minimal_initials(self.network, Assignment(fleet_of), self.fleet_count)
        totals = [0] * self.fleet_count
        for (_, j), count in initial.items():
            totals[j] += count
        return {j: totals[j] - cap for j, cap in enumerate(self.fleet_caps) if totals[j] > cap}

    def is_feasible(self, fleets: Sequence[int]) -> bool:
        """Fleet caps hold and a non-negative initial placement within N_j exists."""
        counts = np.bincount(np.asarray(fleets, dtype=np.int64), minlength=self.fleet_count)
        if np.any(counts > np.asarray(self.fleet_caps)):
            return False
        return not self.initial_excess(fleets)


def build_ilp(instance: Instance) -> IlpModel:
    """Build the single-day ILP; multi-day instances belong to the BLP model."""
    if len(instance.days) > 1:
        raise ModelInconsistencyError(
            f"the ILP model is single-day; instance spans days {list(instance.sorted_days)} - use the BLP model"
        )
    network = build_timeline(list(instance.flights))
    model = IlpModel(
        instance=instance,
        network=network,
        fleet_caps=tuple(fleet.available for fleet in instance.fleets),
        flight_ids=tuple(flight.id for flight in instance.flights),
    )
    logger.debug(
        "ILP built: %d flights, %d nodes, %d variables, %d constraints",
        len(model.flight_ids), network.node_count, model.variable_count, model.constraint_count,
    )
    return model


def grounded_report_rows(instance: Instance, end_of_day: Mapping[Tuple[str, int], int]) -> List[List]:
    """Rows of the `city,<fleet names...>` grounded-aircraft table."""
    airports = sorted({airport for airport, _ in end_of_day})
    header = ["city"] + [fleet.name for fleet in instance.fleets]
    rows = [header]
    for airport in airports:
        rows.append([airport] + [end_of_day.get((airport, fleet.id), 0) for fleet in instance.fleets])
    return rows


def end_of_day_counts(model: IlpModel, assignment: Assignment) -> Dict[Tuple[str, int], int]:
    """End-of-day grounded counts per airport for an assignment (minimal initials if none given)."""
    initial = assignment.initial
    if initial is None:
        initial = minimal_initials(model.network, assignment, model.fleet_count)
    return propagate_grounded(model.network, assignment, initial, model.fleet_count).end_of_day
