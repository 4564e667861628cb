"""
Simulated-annealing backend over a compiled QUBO.

Each read of the sampler is decoded to a fleet per flight, repaired into a
feasible assignment and scored on the true objective; the cheapest feasible
read wins. Local-search polishing of the repaired reads is opt-in.
"""

import itertools
import logging
import math
import time
from typing import Optional, Tuple, Union

import numpy as np
from dwave.samplers import SimulatedAnnealingSampler

from ..models.data_models import AnnealConfig, Assignment, ModelKind, SolveReport, SolveStatus
from ..utils.config import Config
from ..utils.error_handler import ModelInconsistencyError, RepairError
from .blp_model import BlpModel
from .cqm import QuadraticModel, QuboForm, from_blp, from_ilp, to_qubo
from .ilp_model import IlpModel

logger = logging.getLogger(__name__)

# Metropolis acceptance at the schedule ends
HOT_ACCEPTANCE = 0.5
COLD_ACCEPTANCE = 1e-4

FleetModel = Union[BlpModel, IlpModel]


def _flight_count(model: FleetModel) -> int:
    return len(model.instance.flights)


def _caps(model: FleetModel) -> np.ndarray:
    return np.array([fleet.available for fleet in model.instance.fleets], dtype=np.int64)


def x_bit_index(qubo: QuboForm, model: FleetModel) -> np.ndarray:
    """(flights x fleets) array of the bit index of each x variable."""
    n, eta = _flight_count(model), model.instance.fleet_count
    index = np.empty((n, eta), dtype=np.int64)
    for pos in range(n):
        for j in range(eta):
            index[pos, j] = qubo.index_of(("x", pos, j))
    return index


def repair(model: FleetModel, chosen: np.ndarray) -> np.ndarray:
    """
    Turn a decoded (flights x fleets) 0/1 matrix into a feasible fleet vector.

    1. Flights with zero or several fleets set take the cheapest fleet among
       those set (all fleets when none is), preferring fleets with spare
       capacity in the flight's cap group.
    2. While a fleet is over its cap in a group, the single move to an
       under-cap fleet with the smallest cost increase is applied.
    3. ILP: the minimal initial placement must fit within N_j.

    Feasible input comes back unchanged.

    Raises:
        RepairError: no feasible assignment is reachable
    """
    costs = model.instance.effective_costs
    caps = _caps(model)
    chosen = np.asarray(chosen, dtype=bool)
    n, eta = chosen.shape
    fleets = np.where(chosen.sum(axis=1) == 1, chosen.argmax(axis=1), -1)

    for group in model.cap_groups():
        counts = np.bincount(fleets[group][fleets[group] >= 0], minlength=eta)
        for pos in group:
            if fleets[pos] >= 0:
                continue
            candidates = np.flatnonzero(chosen[pos]) if chosen[pos].any() else np.arange(eta)
            spare = candidates[counts[candidates] < caps[candidates]]
            pool = spare if spare.size else candidates
            j = int(pool[np.argmin(costs[pos, pool])])
            fleets[pos] = j
            counts[j] += 1

        while True:
            over = np.flatnonzero(counts > caps)
            if over.size == 0:
                break
            under = np.flatnonzero(counts < caps)
            if under.size == 0:
                raise RepairError(f"{counts.sum()} flights exceed the {caps.sum()} available aircraft")
            movable = group[np.isin(fleets[group], over)]
            deltas = costs[np.ix_(movable, under)] - costs[movable, fleets[movable]][:, None]
            row, col = np.unravel_index(np.argmin(deltas), deltas.shape)
            pos, target = movable[row], under[col]
            counts[fleets[pos]] -= 1
            counts[target] += 1
            fleets[pos] = target

    if isinstance(model, IlpModel):
        excess = model.initial_excess(fleets)
        if excess:
            raise RepairError(f"initial placement exceeds availability for fleets {sorted(excess)}")
    return fleets


def polish(model: FleetModel, fleets: np.ndarray) -> np.ndarray:
    """
    Steepest-descent local search within each cap group over moves into
    spare capacity and pairwise fleet swaps, until no move improves.

    Per-fleet flight counts never grow past their caps, and the minimal
    initial placement of a fleet is bounded by its flight count, so ILP
    feasibility is kept.
    """
    costs = model.instance.effective_costs
    caps = _caps(model)
    fleets = np.array(fleets, dtype=np.int64)
    eta = costs.shape[1]

    for group in model.cap_groups():
        while True:
            current = costs[group, fleets[group]]
            counts = np.bincount(fleets[group], minlength=eta)
            best_gain, best_move = 0, None

            spare = counts < caps
            if spare.any():
                deltas = costs[group][:, spare] - current[:, None]
                row, col = np.unravel_index(np.argmin(deltas), deltas.shape)
                if deltas[row, col] < best_gain:
                    best_gain = deltas[row, col]
                    best_move = ("move", group[row], int(np.flatnonzero(spare)[col]))

            for a in range(eta):
                on_a = group[fleets[group] == a]
                if on_a.size == 0:
                    continue
                for b in range(a + 1, eta):
                    on_b = group[fleets[group] == b]
                    if on_b.size == 0:
                        continue
                    gain = ((costs[on_a, b] - costs[on_a, a])[:, None]
                            + (costs[on_b, a] - costs[on_b, b])[None, :])
                    row, col = np.unravel_index(np.argmin(gain), gain.shape)
                    if gain[row, col] < best_gain:
                        best_gain = gain[row, col]
                        best_move = ("swap", on_a[row], on_b[col])

            if best_move is None:
                break
            kind, first, second = best_move
            if kind == "move":
                fleets[first] = second
            else:
                fleets[first], fleets[second] = fleets[second], fleets[first]

    return fleets


def _is_feasible(model: FleetModel, chosen: np.ndarray) -> Optional[np.ndarray]:
    """Fleet vector when the raw decoded read already satisfies every constraint."""
    if not np.all(chosen.sum(axis=1) == 1):
        return None
    fleets = chosen.argmax(axis=1)
    caps = _caps(model)
    for group in model.cap_groups():
        if np.any(np.bincount(fleets[group], minlength=caps.size) > caps):
            return None
    if isinstance(model, IlpModel) and model.initial_excess(fleets):
        return None
    return fleets


def beta_range_for(qubo: QuboForm) -> Tuple[float, float]:
    """
    Geometric schedule end points from the QUBO's energy scales.

    At the hot end the largest possible single-flip energy change is accepted
    with HOT_ACCEPTANCE; at the cold end the smallest nonzero objective
    coefficient is accepted with COLD_ACCEPTANCE.
    """
    flip = np.zeros(qubo.num_bits)
    for v, bias in qubo.bqm.linear.items():
        flip[v] += abs(bias)
    for (u, v), bias in qubo.bqm.quadratic.items():
        flip[u] += abs(bias)
        flip[v] += abs(bias)
    largest = float(flip.max()) if flip.size else 0.0
    steps = [abs(b) for b in itertools.chain(qubo.model.linear.values(), qubo.model.quadratic.values()) if b]
    smallest = min(steps) if steps else largest
    if largest <= 0:
        return -math.log(HOT_ACCEPTANCE), -math.log(COLD_ACCEPTANCE)

    hot = -math.log(HOT_ACCEPTANCE) / largest
    cold = -math.log(COLD_ACCEPTANCE) / smallest
    return hot, max(cold, -math.log(COLD_ACCEPTANCE) / largest)


def sampler_seed(seed: int) -> int:
    """Fold a 64-bit seed into the sampler's 32-bit seed by xor of its halves."""
    seed &= 0xFFFFFFFFFFFFFFFF
    return (seed ^ (seed >> 32)) & 0xFFFFFFFF


class SimulatedAnnealer:
    """Runs the sampler on a QuboForm compiled from a BLP or ILP model."""

    def __init__(self, config: Optional[AnnealConfig] = None):
        self.config = config or AnnealConfig()
        self.sampler = SimulatedAnnealingSampler()

    def beta_range(self, qubo: QuboForm) -> Tuple[float, float]:
        if self.config.beta_start is not None:
            return self.config.beta_start, self.config.beta_end
        return beta_range_for(qubo)

    def sample(self, qubo: QuboForm) -> Tuple[np.ndarray, np.ndarray, int]:
        """Bits per read (in bit order), their energies and the sweep count used."""
        config = self.config
        sweeps = config.sweeps or Config.default_sweeps(qubo.num_bits)
        interrupt = None
        if config.time_limit is not None:
            deadline = time.perf_counter() + config.time_limit
            interrupt = lambda: time.perf_counter() > deadline  # noqa: E731

        sampleset = self.sampler.sample(
            qubo.bqm,
            num_reads=config.restarts,
            num_sweeps=sweeps,
            beta_range=self.beta_range(qubo),
            beta_schedule_type="geometric",
            seed=sampler_seed(config.seed),
            interrupt_function=interrupt,
        )
        columns = [sampleset.variables.index(v) for v in range(qubo.num_bits)]
        bits = np.asarray(sampleset.record.sample)[:, columns]
        return bits, np.asarray(sampleset.record.energy), sweeps

    def run(self, qubo: QuboForm, bound: Optional[float] = None) -> SolveReport:
        started = time.perf_counter()
        model = qubo.model.source
        kind = qubo.model.kind
        if not isinstance(model, (BlpModel, IlpModel)):
            raise ModelInconsistencyError("the QUBO was not compiled from a fleet assignment model")
        instance = model.instance
        costs = instance.effective_costs

        if _flight_count(model) == 0:
            return self._report(Assignment({}, grounded={}, initial={}) if kind == ModelKind.ILP else Assignment({}),
                                0, bound, kind, started, {"feasible_reads": 1, "reads": 0})

        bits, energies, sweeps = self.sample(qubo)
        index = x_bit_index(qubo, model)
        best: Optional[Tuple[int, int, np.ndarray]] = None
        positions = np.arange(index.shape[0])
        feasible_reads = 0
        repaired_reads = 0
        polished_reads = 0
        for read, sample in enumerate(bits):
            chosen = sample[index].astype(bool)
            fleets = _is_feasible(model, chosen)
            if fleets is None:
                if not self.config.repair:
                    continue
                try:
                    fleets = repair(model, chosen)
                except RepairError as e:
                    logger.debug("read %d irreparable: %s", read, e)
                    continue
                repaired_reads += 1
            feasible_reads += 1
            cents = int(costs[positions, fleets].sum())
            if self.config.polish:
                fleets = polish(model, fleets)
                polished = int(costs[positions, fleets].sum())
                polished_reads += polished < cents
                cents = polished
            if best is None or (cents, read) < best[:2]:
                best = (cents, read, fleets)

        stats = {
            "reads": int(bits.shape[0]),
            "sweeps": sweeps,
            "bits": qubo.num_bits,
            "beta_range": list(self.beta_range(qubo)),
            "feasible_reads": feasible_reads,
            "repaired_reads": repaired_reads,
            "polish": self.config.polish,
            "polished_reads": polished_reads,
            "best_energy": float(energies.min()) if energies.size else None,
        }
        if best is None:
            return SolveReport(math.inf, SolveStatus.INFEASIBLE, time.perf_counter() - started,
                               model_kind=kind, stats=stats)

        fleets = best[2]
        if isinstance(model, IlpModel):
            assignment = model.assignment_for(fleets)
        else:
            assignment = Assignment.from_vector(instance, fleets)
        return self._report(assignment, best[0], bound, kind, started, stats)

    @staticmethod
    def _report(assignment: Assignment, cents: int, bound: Optional[float], kind: ModelKind,
                started: float, stats: dict) -> SolveReport:
        objective = cents / 100
        if bound is not None:
            stats = {**stats, "reference_bound": bound}
        if bound is not None and round(bound * 100) == cents:
            return SolveReport(objective, SolveStatus.OPTIMAL, time.perf_counter() - started, assignment,
                               bound=objective, model_kind=kind, stats=stats)
        return SolveReport(objective, SolveStatus.FEASIBLE, time.perf_counter() - started, assignment,
                           model_kind=kind, stats=stats)


def anneal(qubo: QuboForm, config: Optional[AnnealConfig] = None, bound: Optional[float] = None) -> SolveReport:
    """Best feasible decoded read; Optimal only when it meets ``bound``."""
    return SimulatedAnnealer(config).run(qubo, bound)


def anneal_model(model: FleetModel, config: Optional[AnnealConfig] = None,
                 bound: Optional[float] = None, base_penalty: Optional[float] = None) -> Tuple[QuboForm, SolveReport]:
    """Compile ``model`` (x bits only for the ILP) and anneal it."""
    qubo = compile_qubo(model, base_penalty)
    return qubo, anneal(qubo, config, bound)


def assignment_penalty(qm: QuadraticModel) -> float:
    """
    Largest reduced cost plus one.

    On a reduced-cost assignment model every violating state has a single
    repair step (drop a surplus fleet, fill an empty row, move a flight off an
    over-cap fleet) that costs at most the largest reduced cost and removes at
    least one penalty unit, so ground states stay feasible optima.
    """
    return max(qm.linear.values(), default=0) + 1


def compile_qubo(model: FleetModel, base_penalty: Optional[float] = None) -> QuboForm:
    """
    Reduced-cost QUBO of ``model`` (x bits only for the ILP).

    The penalty defaults to assignment_penalty, which keeps one-hot barriers
    on the scale of the cost differences the sampler has to resolve.
    """
    if isinstance(model, IlpModel):
        qm = from_ilp(model, materialize_grounded=False, reduced=True)
    else:
        qm = from_blp(model, reduced=True)
    return to_qubo(qm, assignment_penalty(qm) if base_penalty is None else base_penalty)

