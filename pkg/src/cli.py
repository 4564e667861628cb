"""
Command-line entry point for fleetopt.

Subcommands: generate, solve, bench, export-dot, inspect.
Exit codes: 0 success, 1 infeasible, 2 usage error, 3 I/O or model error.
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .models.data_models import AnnealConfig, Instance, ModelKind
from .services.annealer import compile_qubo
from .services.bench import export_timeline_dot, run_suite
from .services.cqm import write_qubo
from .services.evaluator import check_feasibility, search_space_log2
from .services.ilp_model import end_of_day_counts, grounded_report_rows
from .services.instance_handler import generate_instance, ladder_configs, save_instance
from .services.pipeline import BACKENDS, SolvePipeline
from .services.report_writer import ReportWriter
from .utils.config import Config
from .utils.error_handler import (
    EXIT_FAILURE, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, ErrorHandler, FleetOptError, PipelineError, UserMessage,
)
from .utils.run_logging import get_run_logger


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    return int(os.getenv("FLEETOPT_SEED", Config.DEFAULT_SEED))


def _penalty(value: Optional[float]) -> float:
    return Config.DEFAULT_LAMBDA if value is None else value


def _add_generator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="generator seed (default: FLEETOPT_SEED or 0)")
    parser.add_argument("--flights-per-day", type=int, default=Config.BASE_FLIGHTS_PER_DAY)
    parser.add_argument("--days", type=int, help="days in the horizon (default: 7 for blp, 1 for ilp)")
    parser.add_argument("--lambda", dest="penalty_weight", type=float, help="capacity-mismatch penalty weight")


def _add_anneal_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sweeps", type=int, help="sweeps per read (default: 2000*sqrt(bits), capped)")
    parser.add_argument("--restarts", type=int, default=Config.ANNEAL_RESTARTS, help="independent reads")
    parser.add_argument("--anneal-seed", type=int, default=0)
    parser.add_argument("--no-repair", action="store_true", help="discard infeasible reads instead of repairing")
    parser.add_argument("--polish", action="store_true", help="local search over the repaired reads")


def _add_model_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=[k.value for k in ModelKind], default=ModelKind.BLP.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fleetopt", description="Airline fleet assignment toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="write a seeded synthetic instance")
    _add_generator_flags(generate)
    generate.add_argument("--out-dir", required=True, type=Path)

    solve = commands.add_parser("solve", help="solve an instance directory")
    solve.add_argument("--instance-dir", required=True, type=Path)
    _add_model_flag(solve)
    solve.add_argument("--backend", choices=BACKENDS, default="exact")
    solve.add_argument("--time-limit", type=float, help="exact solver limit in seconds")
    solve.add_argument("--out-dir", type=Path, help="where assignment.csv goes (default: the instance dir)")
    _add_anneal_flags(solve)

    bench = commands.add_parser("bench", help="exact vs anneal over a size ladder")
    _add_model_flag(bench)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--lambda", dest="penalty_weight", type=float)
    bench.add_argument("--flights-per-day", type=int, nargs="+", help="ladder sizes (default ladder otherwise)")
    bench.add_argument("--days", type=int)
    bench.add_argument("--large", action="store_true", help="append the large ladder")
    bench.add_argument("--workers", type=int)
    bench.add_argument("--time-limit", type=float)
    bench.add_argument("--out-dir", required=True, type=Path)
    bench.add_argument("--pdf", action="store_true", help="also write bench.pdf")
    _add_anneal_flags(bench)

    export = commands.add_parser("export-dot", help="solve an instance and write its flight graph as DOT")
    export.add_argument("--instance-dir", required=True, type=Path)
    _add_model_flag(export)
    export.add_argument("--backend", choices=BACKENDS, default="exact")
    export.add_argument("--time-limit", type=float)
    export.add_argument("--out", type=Path, help="DOT path (default: <instance-dir>/timeline.dot)")

    inspect = commands.add_parser("inspect", help="print model size and search space")
    inspect.add_argument("--instance-dir", type=Path, help="saved instance; generated from flags when omitted")
    _add_model_flag(inspect)
    _add_generator_flags(inspect)
    inspect.add_argument("--qubo-out", type=Path, help="write the compiled QUBO to this file")

    return parser


def _anneal_config(args: argparse.Namespace) -> AnnealConfig:
    beta_range = Config.ANNEAL_BETA_RANGE
    return AnnealConfig(
        sweeps=args.sweeps,
        restarts=args.restarts,
        beta_start=beta_range[0] if beta_range else None,
        beta_end=beta_range[1] if beta_range else None,
        seed=args.anneal_seed,
        repair=not args.no_repair,
        polish=args.polish,
    )


def _generated(args: argparse.Namespace, model_kind: ModelKind) -> Instance:
    days = args.days or (Config.BLP_DAYS if model_kind == ModelKind.BLP else Config.ILP_DAYS)
    config = ladder_configs([args.flights_per_day], days, _seed(args.seed), _penalty(args.penalty_weight))[0]
    return generate_instance(config)


def cmd_generate(args: argparse.Namespace) -> int:
    instance = _generated(args, ModelKind.BLP)
    paths = save_instance(instance, args.out_dir, args.flights_per_day)
    print(f"wrote {len(instance.flights)} flights to {paths['schedule'].parent}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    model_kind = ModelKind(args.model)
    pipeline = SolvePipeline()
    instance = pipeline.load(args.instance_dir)
    outcome = pipeline.solve(
        instance, model_kind, args.backend,
        time_limit=args.time_limit,
        anneal_config=_anneal_config(args),
        label=str(args.instance_dir),
    )
    report = outcome.report
    print(f"status={report.status.value} objective={report.objective:.2f} "
          f"wall_time={report.wall_time:.3f}s build_time={outcome.build_time:.3f}s")
    if report.assignment is None:
        return EXIT_INFEASIBLE

    violations = check_feasibility(instance, report.assignment, model_kind)
    if violations:
        raise FleetOptError("solver returned an infeasible assignment: " + violations[0].describe())

    out_dir = args.out_dir or args.instance_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    writer = ReportWriter()
    path = writer.write_assignment_csv(instance, report.assignment, out_dir / "assignment.csv")
    print(path.read_text(encoding="utf-8"), end="")
    print(f"assignment: {path}")
    if model_kind == ModelKind.ILP:
        rows = grounded_report_rows(instance, end_of_day_counts(outcome.model, report.assignment))
        print(f"grounded: {writer.write_grounded_csv(rows, out_dir / 'grounded.csv')}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    model_kind = ModelKind(args.model)
    days = args.days or (Config.BLP_DAYS if model_kind == ModelKind.BLP else Config.ILP_DAYS)
    sizes = args.flights_per_day or Config.ladder(args.large)
    configs = ladder_configs(sizes, days, _seed(args.seed), _penalty(args.penalty_weight))
    anneal_config = _anneal_config(args)

    rows = run_suite(configs, model_kind, anneal_config, args.time_limit, args.workers)
    writer = ReportWriter()
    writer.write_report(rows, args.out_dir, model_kind=model_kind.value, anneal_config=anneal_config.to_dict())
    if args.pdf:
        writer.write_pdf_report(rows, args.out_dir / "bench.pdf")

    for line in writer.bench_table(rows):
        print(",".join(line))
    failed = [row.label for row in rows if row.error]
    if failed:
        print(f"rows failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    model_kind = ModelKind(args.model)
    pipeline = SolvePipeline()
    instance = pipeline.load(args.instance_dir)
    report = pipeline.solve(instance, model_kind, args.backend, time_limit=args.time_limit,
                            label=str(args.instance_dir)).report
    if report.assignment is None:
        print(f"status={report.status.value}: nothing to export")
        return EXIT_INFEASIBLE
    path = export_timeline_dot(instance, report.assignment, args.out or args.instance_dir / "timeline.dot")
    print(f"timeline: {path}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    model_kind = ModelKind(args.model)
    pipeline = SolvePipeline()
    instance = pipeline.load(args.instance_dir) if args.instance_dir else _generated(args, model_kind)
    model = pipeline.build(instance, model_kind)
    print(f"variables={model.variable_count} constraints={model.constraint_count}")
    print(f"search_space_log2={search_space_log2(instance):.2f}")
    if args.qubo_out:
        qubo = compile_qubo(model)
        write_qubo(qubo, args.qubo_out)
        print(f"qubo: {qubo.num_bits} bits -> {args.qubo_out}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "bench": cmd_bench,
    "export-dot": cmd_export_dot,
    "inspect": cmd_inspect,
}


def _report_error(message: UserMessage) -> int:
    print(f"{message.title}: {message.message}", file=sys.stderr)
    for action in message.suggested_actions:
        print(f"  - {action}", file=sys.stderr)
    return message.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    get_run_logger()
    error_handler = ErrorHandler()
    try:
        return COMMANDS[args.command](args)
    except PipelineError as e:
        return _report_error(e.user_message)
    except (FleetOptError, OSError) as e:
        return _report_error(error_handler.handle(e, {"command": args.command}))


if __name__ == "__main__":
    sys.exit(main())
