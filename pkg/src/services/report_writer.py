"""
Report and export writers.
Bench tables (CSV, JSON, plot data, optional PDF), assignment CSVs and the
grounded-aircraft table.
"""

import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd
from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4, landscape
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from ..models.data_models import Assignment, BenchRow, Instance, SolveStatus
from ..utils.error_handler import ErrorHandler
from ..utils.run_logging import get_run_logger
from .instance_handler import format_time

PathLike = Union[str, Path]

BENCH_COLUMNS = [
    "label", "variables", "constraints", "exact_cost", "anneal_cost", "exact_time_s", "anneal_time_s", "gap",
]
ASSIGNMENT_COLUMNS = [
    "flight", "origin", "departure", "destination", "arrival", "passengers", "day", "fleet_assigned",
]
TIMING_NOTE = "times cover the solver call only; instance generation and model build (QUBO compilation included) are excluded"
INFEASIBLE = "Infeasible"


def format_cost(cost: Optional[float], status: Optional[SolveStatus]) -> str:
    if status == SolveStatus.INFEASIBLE:
        return INFEASIBLE
    if cost is None or not math.isfinite(cost):
        return ""
    return f"{cost:.2f}"


def format_gap(gap: Optional[float]) -> str:
    return "" if gap is None else f"{gap:.6f}"


def _json_number(value: Optional[float]) -> Optional[float]:
    return value if value is not None and math.isfinite(value) else None


class ReportWriter:
    """Writes bench reports and solve exports."""

    def __init__(self):
        self.styles = getSampleStyleSheet()
        self._setup_custom_styles()
        self.error_handler = ErrorHandler()
        self.logger = get_run_logger()

    def _setup_custom_styles(self):
        self.styles.add(ParagraphStyle(
            name='ReportTitle',
            parent=self.styles['Title'],
            fontSize=16,
            spaceAfter=16,
            alignment=TA_CENTER,
            textColor=colors.darkblue
        ))
        self.styles.add(ParagraphStyle(
            name='Note',
            parent=self.styles['Normal'],
            fontSize=9,
            textColor=colors.grey,
            spaceAfter=6
        ))

    def bench_table(self, rows: Sequence[BenchRow]) -> List[List[str]]:
        """Header plus one rendered line per row, in the bench.csv layout."""
        table = [list(BENCH_COLUMNS)]
        for row in rows:
            table.append([
                row.label,
                str(row.variables),
                str(row.constraints),
                format_cost(row.exact_cost, row.exact_status),
                format_cost(row.anneal_cost, row.anneal_status),
                f"{row.exact_time:.1f}",
                f"{row.anneal_time:.1f}",
                format_gap(row.gap),
            ])
        return table

    def write_report(self, rows: Sequence[BenchRow], directory: PathLike,
                     model_kind: str = "", anneal_config: Optional[dict] = None) -> Dict[str, Path]:
        """
        Emit bench.csv, bench.json, bench_timing.json and the plot-data files.

        bench.json and the cost series are byte-identical across reruns with
        the same seeds and configs. Measured times and memory live only in
        bench_timing.json, the time series and the time columns of bench.csv.

        Returns:
            Mapping of artefact name to path
        """
        if not rows:
            raise ValueError("write_report needs at least one row")
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths: Dict[str, Path] = {
            "csv": directory / "bench.csv",
            "json": directory / "bench.json",
            "timing": directory / "bench_timing.json",
        }

        table = self.bench_table(rows)
        frame = pd.DataFrame(table[1:], columns=table[0])

        document = {
            "model": model_kind,
            "anneal_config": anneal_config,
            "rows": [
                {
                    "label": row.label,
                    "seed": row.seed,
                    "config": row.config,
                    "total_flights": row.total_flights,
                    "variables": row.variables,
                    "constraints": row.constraints,
                    "exact_cost": _json_number(row.exact_cost),
                    "anneal_cost": _json_number(row.anneal_cost),
                    "exact_status": row.exact_status.value if row.exact_status else None,
                    "anneal_status": row.anneal_status.value if row.anneal_status else None,
                    "gap": row.gap,
                    "error": row.error,
                    **{key: value for key, value in sorted(row.extras.items())},
                }
                for row in rows
            ],
        }
        timing = {
            "timing": TIMING_NOTE,
            "rows": [
                {
                    "label": row.label,
                    "exact_time_s": round(row.exact_time, 4),
                    "anneal_time_s": round(row.anneal_time, 4),
                    **{key: value for key, value in sorted(row.timings.items())},
                }
                for row in rows
            ],
        }

        series = {
            "exact_cost": [(r.total_flights, r.exact_cost) for r in rows],
            "anneal_cost": [(r.total_flights, r.anneal_cost) for r in rows],
            "exact_time": [(r.total_flights, r.exact_time) for r in rows],
            "anneal_time": [(r.total_flights, r.anneal_time) for r in rows],
        }

        def write_all():
            frame.to_csv(paths["csv"], index=False, lineterminator="\n")
            paths["json"].write_text(json.dumps(document, indent=2) + "\n")
            paths["timing"].write_text(json.dumps(timing, indent=2) + "\n")
            for name, points in series.items():
                path = directory / f"{name}.dat"
                lines = [f"# total_flights {name}"]
                lines += [f"{x} {y:.2f}" if "cost" in name else f"{x} {y:.1f}"
                          for x, y in points if y is not None and math.isfinite(y)]
                path.write_text("\n".join(lines) + "\n")
                paths[name] = path

        self.error_handler.with_retry(write_all, f"write_report:{directory}")
        self.logger.log_file_operation("write_report", str(directory), True)
        return paths

    def write_pdf_report(self, rows: Sequence[BenchRow], path: PathLike, title: str = "Fleet assignment benchmark") -> Path:
        """Render the bench table to PDF."""
        path = Path(path)
        doc = SimpleDocTemplate(
            str(path),
            pagesize=landscape(A4),
            rightMargin=36,
            leftMargin=36,
            topMargin=36,
            bottomMargin=18,
            invariant=True,
        )
        story = [Paragraph(title, self.styles['ReportTitle']), Spacer(1, 12)]

        table = Table(self.bench_table(rows), repeatRows=1)
        table.setStyle(TableStyle([
            ('ALIGN', (1, 0), (-1, -1), 'RIGHT'),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, -1), 9),
            ('BOTTOMPADDING', (0, 0), (-1, -1), 4),
            ('TOPPADDING', (0, 0), (-1, -1), 4),
            ('GRID', (0, 0), (-1, -1), 0.5, colors.lightgrey),
            ('BACKGROUND', (0, 0), (-1, 0), colors.lightblue),
        ]))
        story.append(table)
        story.append(Spacer(1, 12))
        story.append(Paragraph(TIMING_NOTE, self.styles['Note']))

        doc.build(story)
        self.logger.log_file_operation("write_pdf_report", str(path), True)
        return path

    def write_assignment_csv(self, instance: Instance, assignment: Assignment, path: PathLike) -> Path:
        """Solved schedule: one row per flight with its assigned fleet name."""
        path = Path(path)
        frame = pd.DataFrame(
            [
                [f.id, f.origin, format_time(f.departure), f.destination, format_time(f.arrival),
                 f.demand, f.day, instance.fleets[assignment.fleet_of[f.id]].name]
                for f in instance.flights
            ],
            columns=ASSIGNMENT_COLUMNS,
        )
        self.error_handler.with_retry(frame.to_csv, f"assignment:{path}", path, index=False, lineterminator="\n")
        self.logger.log_file_operation("write_assignment", str(path), True)
        return path

    def write_grounded_csv(self, rows: List[List], path: PathLike) -> Path:
        """`city,<fleet names...>` table of end-of-day grounded aircraft."""
        path = Path(path)
        frame = pd.DataFrame(rows[1:], columns=rows[0])
        self.error_handler.with_retry(frame.to_csv, f"grounded:{path}", path, index=False, lineterminator="\n")
        self.logger.log_file_operation("write_grounded", str(path), True)
        return path


def write_report(rows: Sequence[BenchRow], directory: PathLike, **kwargs) -> Dict[str, Path]:
    return ReportWriter().write_report(rows, directory, **kwargs)


def write_pdf_report(rows: Sequence[BenchRow], path: PathLike) -> Path:
    return ReportWriter().write_pdf_report(rows, path)
