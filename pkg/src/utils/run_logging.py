"""
Run logging for fleetopt.
Structured, event-shaped log lines for solves, bench rows and file operations.
"""

import logging
import os
import re
from typing import Any, Dict, Optional
from pathlib import Path


class RunFormatter(logging.Formatter):
    """
    Formatter that trims long float renderings in log messages.

    Solver objectives come out of numpy and cent arithmetic with long
    mantissas; structured fields are printed with at most 6 significant digits.
    """

    FLOAT_PATTERN = re.compile(r"(?<![\w.])(-?\d+\.\d{7,})(?![\w.])")

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        return self.FLOAT_PATTERN.sub(lambda m: f"{float(m.group(1)):.6g}", message)


class RunLogger:
    """
    Logger for solver runs and benchmark activity.
    """

    def __init__(self, name: str = "fleetopt", log_level: str = "INFO", log_dir: Optional[str] = None):
        """
        Initialize the run logger.

        Args:
            name: Logger name
            log_level: Logging level
            log_dir: Directory for the log file; console only when None
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
        self._run_counter = 0

        # Prevent duplicate handlers
        if not self.logger.handlers:
            self._setup_handlers(log_dir)

    def _setup_handlers(self, log_dir: Optional[str]) -> None:
        formatter = RunFormatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.WARNING)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if log_dir:
            path = Path(log_dir)
            path.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(path / "fleetopt.log")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def log_solve_start(self, label: str, model_kind: str, backend: str) -> str:
        """
        Log the start of a solve.

        Returns:
            Run ID used to correlate the completion line
        """
        self._run_counter += 1
        run_id = f"run_{os.getpid()}_{self._run_counter}"
        self.logger.info(
            f"Solve started - Run: {run_id}, Instance: {label}, Model: {model_kind}, Backend: {backend}"
        )
        return run_id

    def log_solve_complete(self, run_id: str, status: str, objective: Optional[float], wall_time: float) -> None:
        self.logger.info(
            f"Solve completed - Run: {run_id}, Status: {status}, "
            f"Objective: {objective}, Time: {wall_time:.2f}s"
        )

    def log_bench_row(self, label: str, exact_cost: Optional[float], anneal_cost: Optional[float],
                      gap: Optional[float]) -> None:
        self.logger.info(
            f"Bench row - Instance: {label}, Exact: {exact_cost}, Anneal: {anneal_cost}, Gap: {gap}"
        )

    def log_error(self, error: Exception, context: Optional[Dict[str, Any]] = None) -> None:
        self.logger.error(
            f"Error occurred - Type: {type(error).__name__}, "
            f"Message: {str(error)}, Context: {context or {}}",
            exc_info=True
        )

    def log_file_operation(self, operation: str, file_path: str, success: bool) -> None:
        level = logging.INFO if success else logging.ERROR
        self.logger.log(
            level,
            f"File operation - Type: {operation}, Path: {file_path}, Success: {success}"
        )


# Global run logger instance
_run_logger: Optional[RunLogger] = None


def get_run_logger(name: str = "fleetopt") -> RunLogger:
    """
    Get the global run logger instance.
    """
    global _run_logger

    if _run_logger is None:
        _run_logger = RunLogger(name, os.getenv("LOG_LEVEL", "INFO"), os.getenv("LOG_DIR") or None)

    return _run_logger
