from .data_models import (
    AnnealConfig, Assignment, BenchRow, CostMatrix, FleetType, Flight, GeneratorConfig, Instance,
    ModelKind, PipelineState, SolveReport, SolveStatus, Violation,
)

__all__ = [
    "AnnealConfig", "Assignment", "BenchRow", "CostMatrix", "FleetType", "Flight", "GeneratorConfig",
    "Instance", "ModelKind", "PipelineState", "SolveReport", "SolveStatus", "Violation",
]
