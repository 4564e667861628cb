"""
Exact optimization backends.

- FlowNetwork: successive shortest paths with node potentials on the
  source -> flight -> fleet -> sink transportation network of one day.
- solve_blp_exact: one min-cost flow per day.
- solve_ilp_exact: depth-first branch and bound whose bound is the
  transportation relaxation (aircraft balance dropped).
- brute_force: vectorized exhaustive enumeration, the test-scale oracle.
"""

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..models.data_models import Assignment, Instance, ModelKind, SolveReport, SolveStatus
from ..utils.config import Config
from ..utils.error_handler import InstanceTooLargeError, ModelInconsistencyError
from .blp_model import BlpModel, DayProblem, build_blp
from .ilp_model import IlpModel, build_ilp

logger = logging.getLogger(__name__)

INFINITY = float("inf")
_CHUNK = 1 << 16


class FlowNetwork:
    """
    Residual network of one transportation problem.

    Node 0 is the source, 1..n the flights, n+1..n+eta the fleets and the
    last node the sink. Arcs are stored in pairs (arc e, reverse e ^ 1).
    With ``tie_break`` arc costs are ec * n * eta + fleet index, so among
    equal-cost optima the smallest fleet-index sum wins. This is not a
    lexicographic rule: with optima (0, 2) and (1, 0) the second is chosen
    even though the first flight would get the lower fleet in the first.
    Optima with equal sums resolve in Dijkstra scan order.
    """

    def __init__(self, costs: np.ndarray, caps: Sequence[int], tie_break: bool = True):
        costs = np.asarray(costs, dtype=np.int64)
        self.flight_count, self.fleet_count = costs.shape
        n, eta = self.flight_count, self.fleet_count
        if np.any(costs < 0):
            raise ModelInconsistencyError("flow network costs must be non-negative")
        self.source = 0
        self.sink = n + eta + 1
        self.node_count = n + eta + 2
        self.head: List[int] = []
        self.capacity: List[int] = []
        self.cost: List[int] = []
        self.adjacency: List[List[int]] = [[] for _ in range(self.node_count)]
        self.augmentations = 0

        scale = max(1, n * eta) if tie_break else 1
        for i in range(n):
            self._add_arc(self.source, 1 + i, 1, 0)
        for i in range(n):
            for j in range(eta):
                self._add_arc(1 + i, n + 1 + j, 1, int(costs[i, j]) * scale + (j if tie_break else 0))
        for j in range(eta):
            self._add_arc(n + 1 + j, self.sink, int(caps[j]), 0)

    def _add_arc(self, u: int, v: int, capacity: int, cost: int) -> None:
        index = len(self.head)
        self.head.extend((v, u))
        self.capacity.extend((capacity, 0))
        self.cost.extend((cost, -cost))
        self.adjacency[u].append(index)
        self.adjacency[v].append(index + 1)

    def tail(self, arc: int) -> int:
        return self.head[arc ^ 1]

    def _shortest_paths(self, potential: List[float]) -> Tuple[List[float], List[int]]:
        """Dijkstra on reduced costs; ties resolve to the lower node index."""
        dist = [INFINITY] * self.node_count
        parent = [-1] * self.node_count
        dist[self.source] = 0
        heap = [(0, self.source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for arc in self.adjacency[u]:
                if self.capacity[arc] <= 0:
                    continue
                v = self.head[arc]
                candidate = d + self.cost[arc] + potential[u] - potential[v]
                if candidate < dist[v]:
                    dist[v] = candidate
                    parent[v] = arc
                    heapq.heappush(heap, (candidate, v))
        return dist, parent

    def solve(self, deadline: Optional[float] = None) -> Optional[np.ndarray]:
        """
        Route one unit per flight along successive shortest paths.

        Returns the fleet per flight (-1 where no capacity remained), or None
        when ``deadline`` (perf_counter seconds) passed first.
        """
        potential = [0.0] * self.node_count
        while self.augmentations < self.flight_count:
            if deadline is not None and time.perf_counter() > deadline:
                return None
            dist, parent = self._shortest_paths(potential)
            limit = dist[self.sink]
            if limit == INFINITY:
                break
            for v in range(self.node_count):
                potential[v] += min(dist[v], limit)
            v = self.sink
            while v != self.source:
                arc = parent[v]
                self.capacity[arc] -= 1
                self.capacity[arc ^ 1] += 1
                v = self.tail(arc)
            self.augmentations += 1
        return self.fleets()

    def fleets(self) -> np.ndarray:
        n = self.flight_count
        result = np.full(n, -1, dtype=np.int64)
        for i in range(n):
            for arc in self.adjacency[1 + i]:
                if arc % 2 == 0 and self.capacity[arc] == 0 and n < self.head[arc] < self.sink:
                    result[i] = self.head[arc] - n - 1
        return result

    def has_negative_cycle(self) -> bool:
        """Bellman-Ford over residual arcs; True means the current flow is not optimal."""
        dist = [0] * self.node_count
        arcs = [a for a in range(len(self.head)) if self.capacity[a] > 0]
        for _ in range(self.node_count):
            changed = False
            for arc in arcs:
                u, v = self.tail(arc), self.head[arc]
                if dist[u] + self.cost[arc] < dist[v]:
                    dist[v] = dist[u] + self.cost[arc]
                    changed = True
            if not changed:
                return False
        return True


def _greedy_fleets(costs: np.ndarray, caps: Sequence[int]) -> np.ndarray:
    """Each flight in order takes its cheapest fleet with capacity left."""
    remaining = list(caps)
    fleets = np.full(costs.shape[0], -1, dtype=np.int64)
    for i in range(costs.shape[0]):
        for j in np.argsort(costs[i], kind="stable"):
            if remaining[j] > 0:
                fleets[i] = j
                remaining[j] -= 1
                break
    return fleets


def solve_day(problem: DayProblem, deadline: Optional[float] = None) -> Optional[np.ndarray]:
    """Optimal fleet vector for one day, or None on timeout."""
    network = FlowNetwork(problem.effective_cost, problem.fleet_caps)
    fleets = network.solve(deadline)
    if fleets is None:
        return None
    if np.any(fleets < 0):
        raise ModelInconsistencyError(f"day {problem.day}: flow could not place every flight")
    if Config.DEBUG_CHECKS and network.has_negative_cycle():
        raise ModelInconsistencyError(f"day {problem.day}: residual network has a negative cycle")
    return fleets


def _empty_report(model_kind: ModelKind, started: float, assignment: Assignment, **stats) -> SolveReport:
    return SolveReport(0.0, SolveStatus.OPTIMAL, time.perf_counter() - started, assignment,
                       bound=0.0, model_kind=model_kind, stats=stats)


def solve_blp_exact(model: BlpModel, time_limit: Optional[float] = None) -> SolveReport:
    """
    Solve every day problem by min-cost flow.

    Optimal when all days finish; Infeasible when some day has more flights
    than aircraft; TimedOut with greedy days filled in otherwise.
    Among equal-cost optima each day takes the one with the smallest sum of
    fleet indices (see FlowNetwork).
    """
    started = time.perf_counter()
    deadline = started + time_limit if time_limit is not None else None
    instance = model.instance

    if model.infeasible_days:
        return SolveReport(
            math.inf, SolveStatus.INFEASIBLE, time.perf_counter() - started,
            model_kind=ModelKind.BLP, stats={"infeasible_days": list(model.infeasible_days)},
        )
    if not model.day_problems:
        return _empty_report(ModelKind.BLP, started, Assignment({}), days_solved=0)

    fleet_of: Dict[int, int] = {}
    solved_cents = 0
    bound_cents = 0
    unsolved: List[int] = []
    for problem in model.day_problems:
        fleets = solve_day(problem, deadline)
        if fleets is None:
            unsolved.append(problem.day)
            fleets = _greedy_fleets(problem.effective_cost, problem.fleet_caps)
            bound_cents += int(problem.effective_cost.min(axis=1).sum())
        else:
            day_cost = problem.cost_of(fleets)
            solved_cents += day_cost
            bound_cents += day_cost
        fleet_of.update(zip(problem.flight_ids, (int(j) for j in fleets)))

    assignment = Assignment(fleet_of)
    cents = int(sum(instance.effective_costs[instance.flight_index[fid], j] for fid, j in fleet_of.items()))
    stats = {"days_solved": len(model.day_problems) - len(unsolved), "days_unsolved": unsolved}
    wall = time.perf_counter() - started
    if unsolved:
        logger.warning("exact BLP solve timed out on days %s", unsolved)
        return SolveReport(cents / 100, SolveStatus.TIMED_OUT, wall, assignment,
                           bound=bound_cents / 100, model_kind=ModelKind.BLP, stats=stats)
    return SolveReport(cents / 100, SolveStatus.OPTIMAL, wall, assignment,
                       bound=cents / 100, model_kind=ModelKind.BLP, stats=stats)


@dataclass
class BnbNode:
    """Partial assignment with a lower bound on every completion (cents)."""
    fixed: Dict[int, int]
    lower_bound: int
    depth: int
    relaxed: np.ndarray = field(repr=False, default=None)


class BranchAndBound:
    """Depth-first search over flight -> fleet fixings of an IlpModel."""

    def __init__(self, model: IlpModel, deadline: Optional[float] = None):
        self.model = model
        self.deadline = deadline
        self.costs = np.asarray(model.effective_cost, dtype=np.int64)
        self.caps = np.asarray(model.fleet_caps, dtype=np.int64)
        self.incumbent: Optional[np.ndarray] = None
        self.incumbent_cost = math.inf
        self.nodes_explored = 0
        self.timed_out = False
        self.open_bound = math.inf

    def relax(self, fixed: Dict[int, int], depth: int) -> Optional[BnbNode]:
        """Transportation relaxation of the flights not yet fixed; None when it is infeasible."""
        n = len(self.model.flight_ids)
        remaining = self.caps.copy()
        fixed_cost = 0
        for pos, j in fixed.items():
            remaining[j] -= 1
            fixed_cost += int(self.costs[pos, j])
        if np.any(remaining < 0):
            return None
        free = [pos for pos in range(n) if pos not in fixed]
        relaxed = np.full(n, -1, dtype=np.int64)
        for pos, j in fixed.items():
            relaxed[pos] = j
        if free:
            if remaining.sum() < len(free):
                return None
            sub = self.costs[free]
            fleets = FlowNetwork(sub, remaining).solve()
            if fleets is None or np.any(fleets < 0):
                return None
            relaxed[free] = fleets
            fixed_cost += int(sub[np.arange(len(free)), fleets].sum())
        return BnbNode(dict(fixed), fixed_cost, depth, relaxed)

    def _branch_flight(self, node: BnbNode) -> int:
        """Max-regret: unfixed flight with the largest gap between its two cheapest costs."""
        best_pos, best_regret = -1, -1
        for pos in range(len(self.model.flight_ids)):
            if pos in node.fixed:
                continue
            row = np.sort(self.costs[pos])
            regret = int(row[1] - row[0]) if row.size > 1 else 0
            if regret > best_regret:
                best_pos, best_regret = pos, regret
        return best_pos

    def run(self) -> None:
        root = self.relax({}, 0)
        stack = [root] if root is not None else []
        while stack:
            if self.deadline is not None and time.perf_counter() > self.deadline:
                self.timed_out = True
                self.open_bound = min(n.lower_bound for n in stack)
                return
            node = stack.pop()
            self.nodes_explored += 1
            if node.lower_bound >= self.incumbent_cost:
                continue
            if self.model.is_feasible(node.relaxed):
                self.incumbent = node.relaxed
                self.incumbent_cost = node.lower_bound
                logger.debug("incumbent %d cents at depth %d", node.lower_bound, node.depth)
                continue
            pos = self._branch_flight(node)
            if pos < 0:
                continue
            children = []
            for j in sorted(range(self.model.fleet_count), key=lambda f: (self.costs[pos, f], f)):
                child = self.relax({**node.fixed, pos: j}, node.depth + 1)
                if child is not None and child.lower_bound < self.incumbent_cost:
                    children.append(child)
            stack.extend(reversed(children))


def solve_ilp_exact(model: IlpModel, time_limit: Optional[float] = None) -> SolveReport:
    """
    Branch and bound on x; a complete x is feasible when its minimal initial
    placement fits within N_j for every fleet.
    """
    started = time.perf_counter()
    if not model.flight_ids:
        return _empty_report(ModelKind.ILP, started, Assignment({}, grounded={}, initial={}), nodes_explored=0)

    search = BranchAndBound(model, started + time_limit if time_limit is not None else None)
    search.run()
    wall = time.perf_counter() - started
    stats = {"nodes_explored": search.nodes_explored}

    if search.timed_out:
        bound = min(search.open_bound, search.incumbent_cost)
        if search.incumbent is None:
            return SolveReport(math.inf, SolveStatus.TIMED_OUT, wall, bound=bound / 100,
                               model_kind=ModelKind.ILP, stats=stats)
        return SolveReport(search.incumbent_cost / 100, SolveStatus.TIMED_OUT, wall,
                           model.assignment_for(search.incumbent), bound=bound / 100,
                           model_kind=ModelKind.ILP, stats=stats)
    if search.incumbent is None:
        return SolveReport(math.inf, SolveStatus.INFEASIBLE, wall, model_kind=ModelKind.ILP, stats=stats)
    objective = search.incumbent_cost / 100
    return SolveReport(objective, SolveStatus.OPTIMAL, wall, model.assignment_for(search.incumbent),
                       bound=objective, model_kind=ModelKind.ILP, stats=stats)


def _enumerate(costs: np.ndarray, caps: Sequence[int]):
    """
    Yield (index, fleet vectors, costs) chunks over all eta^n vectors that
    respect the caps; flight 0 is the most significant digit, so index order
    is lexicographic order.
    """
    n, eta = costs.shape
    total = eta ** n
    powers = eta ** np.arange(n - 1, -1, -1, dtype=np.int64)
    caps = np.asarray(caps, dtype=np.int64)
    rows = np.arange(n)
    for start in range(0, total, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (index[:, None] // powers[None, :]) % eta
        counts = (digits[:, :, None] == np.arange(eta)[None, None, :]).sum(axis=1)
        ok = np.all(counts <= caps[None, :], axis=1)
        if not ok.any():
            continue
        digits = digits[ok]
        yield index[ok], digits, costs[rows[None, :], digits].sum(axis=1)


def _check_size(bits: float, limit: int) -> None:
    if bits > limit:
        raise InstanceTooLargeError(f"brute force needs {bits:.1f} bits of search space; the limit is {limit}")


def brute_force(instance: Instance, model_kind: ModelKind = ModelKind.BLP,
                max_bits: int = Config.BRUTE_FORCE_MAX_BITS) -> SolveReport:
    """
    Exhaustive optimum. BLP enumerates each day on its own; ILP enumerates
    the day's assignments in cost order until one admits feasible initials.
    """
    started = time.perf_counter()
    eta = instance.fleet_count
    log_eta = math.log2(eta) if eta > 0 else 0.0
    table = instance.effective_costs

    if model_kind == ModelKind.BLP:
        model = build_blp(instance)
        _check_size(max((p.flight_count * log_eta for p in model.day_problems), default=0.0), max_bits)
        fleet_of: Dict[int, int] = {}
        candidates = 0
        for problem in model.day_problems:
            candidates += eta ** problem.flight_count
            best: Optional[Tuple[int, int, np.ndarray]] = None
            for index, digits, cost in _enumerate(problem.effective_cost, problem.fleet_caps):
                k = int(np.argmin(cost))
                if best is None or (int(cost[k]), int(index[k])) < best[:2]:
                    best = (int(cost[k]), int(index[k]), digits[k])
            if best is None:
                return SolveReport(math.inf, SolveStatus.INFEASIBLE, time.perf_counter() - started,
                                   model_kind=model_kind, stats={"candidates": candidates,
                                                                 "infeasible_days": [problem.day]})
            fleet_of.update(zip(problem.flight_ids, (int(j) for j in best[2])))
        assignment = Assignment(fleet_of)
        cents = sum(int(table[instance.flight_index[fid], j]) for fid, j in fleet_of.items())
        return SolveReport(cents / 100, SolveStatus.OPTIMAL, time.perf_counter() - started, assignment,
                           bound=cents / 100, model_kind=model_kind, stats={"candidates": candidates})

    model = build_ilp(instance)
    n = len(model.flight_ids)
    _check_size(n * log_eta, max_bits)
    candidates = eta ** n if n else 1
    if n == 0:
        return _empty_report(model_kind, started, Assignment({}, grounded={}, initial={}), candidates=1)
    chunks = list(_enumerate(np.asarray(table), model.fleet_caps))
    if chunks:
        index = np.concatenate([c[0] for c in chunks])
        digits = np.concatenate([c[1] for c in chunks])
        cost = np.concatenate([c[2] for c in chunks])
        for k in np.lexsort((index, cost)):
            if model.is_feasible(digits[k]):
                objective = int(cost[k]) / 100
                return SolveReport(objective, SolveStatus.OPTIMAL, time.perf_counter() - started,
                                   model.assignment_for(digits[k]), bound=objective,
                                   model_kind=model_kind, stats={"candidates": candidates})
    return SolveReport(math.inf, SolveStatus.INFEASIBLE, time.perf_counter() - started,
                       model_kind=model_kind, stats={"candidates": candidates})
