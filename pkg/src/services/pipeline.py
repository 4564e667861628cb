"""
Staged load -> build -> solve pipeline for fleetopt.
This module orchestrates one solve from instance files to a SolveReport.
"""

import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional, Union

from ..models.data_models import AnnealConfig, Instance, ModelKind, PipelineState, SolveReport
from ..services.annealer import anneal, compile_qubo
from ..services.blp_model import BlpModel, build_blp
from ..services.cqm import QuboForm
from ..services.exact_solver import brute_force, solve_blp_exact, solve_ilp_exact
from ..services.ilp_model import IlpModel, build_ilp
from ..services.instance_handler import InstanceHandler
from ..utils.config import Config
from ..utils.error_handler import ErrorHandler, InstanceValidationError, PipelineError
from ..utils.run_logging import get_run_logger

BACKENDS = ("exact", "anneal", "brute")


@dataclass(frozen=True)
class SolveOutcome:
    """Model, solver report and build time (QUBO compilation included) of one solve."""
    model: Union[BlpModel, IlpModel]
    report: SolveReport
    build_time: float
    qubo: Optional[QuboForm] = None


class SolvePipeline:
    """
    Pipeline that takes an instance through model construction and one
    solver backend, tracking state and running statistics.
    """

    def __init__(self):
        """Initialize the pipeline with its handlers."""
        self.instance_handler = InstanceHandler()
        self.error_handler = ErrorHandler()
        self.run_logger = get_run_logger()

        self.current_state = PipelineState.IDLE
        self.status_callback: Optional[Callable[[PipelineState, str], None]] = None

        # Pipeline statistics
        self.processing_stats = self._empty_stats()

    @staticmethod
    def _empty_stats() -> dict:
        return {
            "solves_completed": 0,
            "total_solve_time": 0.0,
            "average_solve_time": 0.0,
            "errors_encountered": 0,
            "last_completed": None,
        }

    def set_status_callback(self, callback: Optional[Callable[[PipelineState, str], None]]) -> None:
        """
        Set callback function for status updates.

        Args:
            callback: Function to call with (state, message) updates
        """
        self.status_callback = callback

    def _update_status(self, state: PipelineState, message: str = "") -> None:
        self.current_state = state
        if self.status_callback:
            self.status_callback(state, message)

    def _fail(self, error: Exception, context: dict) -> PipelineError:
        """Map an exception raised in the current stage to a PipelineError."""
        stage = self.current_state
        self._update_status(PipelineState.ERROR, f"{stage.value} failed: {error}")
        self.processing_stats["errors_encountered"] += 1
        context = {**context, "stage": stage.value}

        if stage == PipelineState.BUILDING and not isinstance(error, InstanceValidationError):
            user_message = self.error_handler.handle_model_error(error, context)
        else:
            user_message = self.error_handler.handle(error, context)
        return PipelineError(user_message)

    def load(self, directory: Union[str, Path]) -> Instance:
        """Load an instance directory written by save_instance."""
        self._update_status(PipelineState.LOADING, f"Loading {directory}...")
        try:
            return self.instance_handler.load_instance_dir(directory)
        except Exception as e:
            raise self._fail(e, {"directory": str(directory)}) from e

    def build(self, instance: Instance, model_kind: ModelKind) -> Union[BlpModel, IlpModel]:
        """Build the BLP or ILP model of an instance."""
        self._update_status(PipelineState.BUILDING, f"Building {model_kind.value} model...")
        try:
            return build_blp(instance) if model_kind == ModelKind.BLP else build_ilp(instance)
        except Exception as e:
            raise self._fail(e, {"model": model_kind.value}) from e

    def solve(
        self,
        instance: Instance,
        model_kind: ModelKind,
        backend: str = "exact",
        time_limit: Optional[float] = None,
        anneal_config: Optional[AnnealConfig] = None,
        bound: Optional[float] = None,
        label: str = "instance",
    ) -> SolveOutcome:
        """
        Build and solve an instance with one backend.

        Args:
            instance: Solver input
            model_kind: BLP or ILP
            backend: "exact", "anneal" or "brute"
            time_limit: Exact solver limit in seconds; Config.EXACT_TIME_LIMIT when None
            anneal_config: Sampler settings for the anneal backend
            bound: Known optimum that lets an anneal result be reported Optimal
            label: Instance label for the run log

        Returns:
            SolveOutcome; report.wall_time covers the solver call only
        """
        if backend not in BACKENDS:
            raise PipelineError(self.error_handler.handle_usage_error(
                f"unknown backend {backend!r}; choose one of {', '.join(BACKENDS)}"
            ))

        build_started = time.perf_counter()
        model = self.build(instance, model_kind)
        qubo = None
        if backend == "anneal":
            try:
                qubo = compile_qubo(model)
            except Exception as e:
                raise self._fail(e, {"model": model_kind.value, "backend": backend}) from e
        build_time = time.perf_counter() - build_started

        self._update_status(PipelineState.SOLVING, f"Solving with {backend}...")
        run_id = self.run_logger.log_solve_start(label, model_kind.value, backend)
        try:
            if backend == "exact":
                limit = Config.EXACT_TIME_LIMIT if time_limit is None else time_limit
                if model_kind == ModelKind.BLP:
                    report = solve_blp_exact(model, limit)
                else:
                    report = solve_ilp_exact(model, limit)
            elif backend == "anneal":
                report = anneal(qubo, anneal_config, bound)
            else:
                report = brute_force(instance, model_kind)
        except Exception as e:
            self.run_logger.log_error(e, {"run_id": run_id, "backend": backend})
            raise self._fail(e, {"model": model_kind.value, "backend": backend}) from e

        self.run_logger.log_solve_complete(run_id, report.status.value, report.objective, report.wall_time)
        self._update_processing_stats(report.wall_time)
        self._update_status(PipelineState.COMPLETE, f"{report.status.value}: {report.objective}")
        return SolveOutcome(model, report, build_time, qubo)

    def solve_directory(self, directory: Union[str, Path], model_kind: ModelKind, backend: str = "exact",
                        **kwargs) -> SolveOutcome:
        """Load an instance directory, then solve it."""
        instance = self.load(directory)
        return self.solve(instance, model_kind, backend, label=str(directory), **kwargs)

    def _update_processing_stats(self, solve_time: float) -> None:
        self.processing_stats["solves_completed"] += 1
        self.processing_stats["total_solve_time"] += solve_time
        self.processing_stats["average_solve_time"] = (
            self.processing_stats["total_solve_time"] /
            self.processing_stats["solves_completed"]
        )
        self.processing_stats["last_completed"] = datetime.now().isoformat()

    def get_processing_stats(self) -> dict:
        """Get current processing statistics."""
        return self.processing_stats.copy()

    def reset_stats(self) -> None:
        self.processing_stats = self._empty_stats()

    def get_current_state(self) -> PipelineState:
        return self.current_state

    def is_processing(self) -> bool:
        """Check if the pipeline is in the middle of a stage."""
        return self.current_state not in [PipelineState.IDLE, PipelineState.COMPLETE, PipelineState.ERROR]
