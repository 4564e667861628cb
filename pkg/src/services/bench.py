"""
Benchmark harness: exact vs annealing backends across a size ladder, plus
the airport/flight graph export.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import networkx as nx

from ..models.data_models import (
    AnnealConfig, Assignment, BenchRow, GeneratorConfig, Instance, ModelKind, SolveStatus,
)
from ..utils.config import Config
from ..utils.error_handler import ModelInconsistencyError
from ..utils.resource_monitor import ResourceMonitor
from ..utils.run_logging import get_run_logger
from .annealer import anneal, compile_qubo
from .blp_model import build_blp
from .evaluator import search_space_log2
from .exact_solver import solve_blp_exact, solve_ilp_exact
from .ilp_model import build_ilp
from .instance_handler import format_time, generate_instance

logger = logging.getLogger(__name__)

# matplotlib's tab10 colours
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def run_row(config: GeneratorConfig, model_kind: ModelKind, anneal_config: Optional[AnnealConfig] = None,
            time_limit: Optional[float] = None) -> BenchRow:
    """Generate, build and solve one configuration with both backends."""
    instance = generate_instance(config)
    row = BenchRow(label=config.label, variables=0, constraints=0,
                   total_flights=len(instance.flights), seed=config.seed, config=config.to_dict())
    monitor = ResourceMonitor()
    usage: Dict[str, float] = {}
    limit = Config.EXACT_TIME_LIMIT if time_limit is None else time_limit
    try:
        with monitor.track() as usage:
            build_started = time.perf_counter()
            model = build_blp(instance) if model_kind == ModelKind.BLP else build_ilp(instance)
            row.variables = model.variable_count
            row.constraints = model.constraint_count
            row.timings["build_time_s"] = round(time.perf_counter() - build_started, 4)

            started = time.perf_counter()
            if model_kind == ModelKind.BLP:
                exact = solve_blp_exact(model, limit)
            else:
                exact = solve_ilp_exact(model, limit)
            row.exact_time = time.perf_counter() - started
            row.exact_status = exact.status
            if exact.assignment is not None:
                row.exact_cost = exact.objective

            qubo = compile_qubo(model)
            row.extras["qubo_bits"] = qubo.num_bits
            bound = exact.objective if exact.status == SolveStatus.OPTIMAL else None
            started = time.perf_counter()
            annealed = anneal(qubo, anneal_config, bound)
            row.anneal_time = time.perf_counter() - started
            row.anneal_status = annealed.status
            if annealed.assignment is not None:
                row.anneal_cost = annealed.objective
            row.extras["anneal_feasible_reads"] = annealed.stats.get("feasible_reads")
    except Exception as e:
        logger.exception("bench row %s failed", row.label)
        row.error = f"{type(e).__name__}: {e}"
    row.timings["peak_rss_mb"] = usage.get("peak_rss_mb")
    row.extras["search_space_log2"] = search_space_log2(instance)
    get_run_logger().log_bench_row(row.label, row.exact_cost, row.anneal_cost, row.gap)
    return row


def run_suite(configs: Sequence[GeneratorConfig], model_kind: ModelKind,
              anneal_config: Optional[AnnealConfig] = None, time_limit: Optional[float] = None,
              workers: Optional[int] = None) -> List[BenchRow]:
    """
    Run every configuration; rows come back in configuration order.

    Times cover the solver calls only, not generation or model build (QUBO
    compilation counts as build).
    """
    workers = Config.BENCH_WORKERS if workers is None else workers
    task = partial(run_row, model_kind=model_kind, anneal_config=anneal_config, time_limit=time_limit)
    if workers <= 1 or len(configs) <= 1:
        return [task(config) for config in configs]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(task, configs))


def timeline_graph(instance: Instance, assignment: Assignment) -> nx.MultiDiGraph:
    """Airports as nodes, one edge per flight carrying label, fleet and colour."""
    graph = nx.MultiDiGraph()
    airports = sorted({f.origin for f in instance.flights} | {f.destination for f in instance.flights})
    graph.add_nodes_from(airports)
    for flight in instance.flights:
        fleet_id = assignment.fleet_of.get(flight.id)
        if fleet_id is None or not 0 <= fleet_id < instance.fleet_count:
            raise ModelInconsistencyError(f"flight {flight.id} has no assigned fleet")
        graph.add_edge(
            flight.origin, flight.destination, key=flight.id,
            label=f"{flight.id}@{format_time(flight.departure)[:5]}→{format_time(flight.arrival)[:5]}",
            fleet=instance.fleets[fleet_id].name,
            color=PALETTE[fleet_id % len(PALETTE)],
        )
    return graph


def export_timeline_dot(instance: Instance, assignment: Assignment, path: Union[str, Path]) -> Path:
    """Write the flight graph as DOT; edge colour is keyed by the assigned fleet."""
    graph = timeline_graph(instance, assignment)
    legend = ", ".join(
        f"{fleet.name} {PALETTE[fleet.id % len(PALETTE)]}" for fleet in instance.fleets
    )
    lines = [
        "digraph timeline {",
        "  rankdir=LR;",
        f'  graph [label="{legend}", labelloc=b];',
    ]
    for airport in graph.nodes:
        lines.append(f'  "{airport}" [shape=circle];')
    for flight in instance.flights:
        data = graph.edges[flight.origin, flight.destination, flight.id]
        lines.append(
            f'  "{flight.origin}" -> "{flight.destination}" '
            f'[label="{data["label"]}", fleet="{data["fleet"]}", color="{data["color"]}"];'
        )
    lines.append("}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    get_run_logger().log_file_operation("export_dot", str(path), True)
    return path
