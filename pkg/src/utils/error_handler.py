"""
Error types and user-facing error handling for fleetopt.
"""

import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Callable, Any
from datetime import datetime


class FleetOptError(Exception):
    """Base class of every error raised by fleetopt."""


class InstanceValidationError(FleetOptError, ValueError):
    """A domain value violates its invariants."""


class IngestError(FleetOptError):
    """Instance files are missing data or do not match the expected schema."""


class ModelInconsistencyError(FleetOptError):
    """An assignment or instance does not fit the model it is used with."""


class InstanceTooLargeError(FleetOptError):
    """Exhaustive enumeration was refused because the search space is too big."""


class QuboEncodingError(FleetOptError):
    """A quadratic model cannot be compiled into QUBO form."""


class RepairError(FleetOptError):
    """A sampled solution cannot be turned into a feasible one."""


class PipelineError(FleetOptError):
    """A pipeline stage failed; carries the user-facing message."""

    def __init__(self, user_message: "UserMessage"):
        super().__init__(user_message.message)
        self.user_message = user_message


class ErrorType(Enum):
    INPUT_ERROR = "input_error"
    IO_ERROR = "io_error"
    MODEL_ERROR = "model_error"
    SOLVER_ERROR = "solver_error"
    VALIDATION_ERROR = "validation_error"
    USAGE_ERROR = "usage_error"


class ErrorSeverity(Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_FAILURE = 3


@dataclass
class UserMessage:
    title: str
    message: str
    suggested_actions: list[str]
    severity: ErrorSeverity
    exit_code: int = EXIT_FAILURE
    show_retry: bool = False


@dataclass
class ErrorContext:
    error_type: ErrorType
    timestamp: datetime
    user_action: str
    file_info: Optional[Dict[str, Any]] = None
    system_info: Optional[Dict[str, Any]] = None
    stack_trace: Optional[str] = None


class ErrorHandler:
    def __init__(self, logger_name: str = "fleetopt"):
        self.logger = logging.getLogger(logger_name)
        self.retry_counts: Dict[str, int] = {}
        self.max_retries = 3
        self.retry_delay = 0.5

    def handle_input_error(self, error: Exception, context: Optional[Dict] = None) -> UserMessage:
        """Handle unreadable or malformed instance data."""
        self._log_error(error, ErrorContext(
            error_type=ErrorType.INPUT_ERROR,
            timestamp=datetime.now(),
            user_action="load_instance",
            file_info=context,
            stack_trace=str(error)
        ))

        if isinstance(error, FileNotFoundError):
            return UserMessage(
                title="Instance File Missing",
                message=f"Could not find an instance file: {error}",
                suggested_actions=[
                    "Check the --instance-dir path",
                    "Expected fleet.csv, schedule.csv and cost.csv in the directory",
                ],
                severity=ErrorSeverity.MEDIUM,
            )
        return UserMessage(
            title="Invalid Instance Data",
            message=f"The instance could not be loaded: {error}",
            suggested_actions=[
                "Check the CSV headers against the documented schemas",
                "Make sure every (flight, fleet) pair has a cost row",
            ],
            severity=ErrorSeverity.MEDIUM,
        )

    def handle_io_error(self, error: Exception, context: Optional[Dict] = None) -> UserMessage:
        """Handle failures writing reports, instances or exports."""
        self._log_error(error, ErrorContext(
            error_type=ErrorType.IO_ERROR,
            timestamp=datetime.now(),
            user_action="write_output",
            file_info=context,
            stack_trace=str(error)
        ))
        return UserMessage(
            title="Write Failed",
            message=str(error),
            suggested_actions=["Check that the output directory exists and is writable"],
            severity=ErrorSeverity.HIGH,
            show_retry=True,
        )

    def handle_model_error(self, error: Exception, context: Optional[Dict] = None) -> UserMessage:
        """Handle model construction and encoding errors."""
        self._log_error(error, ErrorContext(
            error_type=ErrorType.MODEL_ERROR,
            timestamp=datetime.now(),
            user_action="build_model",
            system_info=context,
            stack_trace=str(error)
        ))

        if isinstance(error, InstanceTooLargeError):
            return UserMessage(
                title="Instance Too Large",
                message=str(error),
                suggested_actions=["Use the exact or anneal backend instead of brute force"],
                severity=ErrorSeverity.MEDIUM,
            )
        return UserMessage(
            title="Model Error",
            message=f"The model could not be built: {error}",
            suggested_actions=[
                "Use --model blp for multi-day instances",
                "Validate the instance with the inspect command",
            ],
            severity=ErrorSeverity.HIGH,
        )

    def handle_solver_error(self, error: Exception, context: Optional[Dict] = None) -> UserMessage:
        """Handle unexpected failures inside a solver backend."""
        self._log_error(error, ErrorContext(
            error_type=ErrorType.SOLVER_ERROR,
            timestamp=datetime.now(),
            user_action="solve",
            system_info=context,
            stack_trace=str(error)
        ))
        return UserMessage(
            title="Solver Failure",
            message=f"The solver stopped with an error: {error}",
            suggested_actions=[
                "Retry with a longer --time-limit",
                "Try the other backend",
            ],
            severity=ErrorSeverity.CRITICAL,
            show_retry=True,
        )

    def handle_validation_error(self, error: Exception, context: Optional[Dict] = None) -> UserMessage:
        """Handle invariant violations of domain values."""
        self._log_error(error, ErrorContext(
            error_type=ErrorType.VALIDATION_ERROR,
            timestamp=datetime.now(),
            user_action="validation",
            file_info=context,
            stack_trace=str(error)
        ))
        return UserMessage(
            title="Validation Error",
            message=f"Instance validation failed: {error}",
            suggested_actions=["Fix the offending row and reload"],
            severity=ErrorSeverity.MEDIUM,
        )

    def handle_usage_error(self, message: str) -> UserMessage:
        self.logger.info(f"Error Type: {ErrorType.USAGE_ERROR.value} | Error: {message}")
        return UserMessage(
            title="Usage Error",
            message=message,
            suggested_actions=["Run with --help for the list of commands and flags"],
            severity=ErrorSeverity.LOW,
            exit_code=EXIT_USAGE,
        )

    def handle(self, error: Exception, context: Optional[Dict] = None) -> UserMessage:
        """Dispatch an exception to the matching handler."""
        if isinstance(error, InstanceValidationError):
            return self.handle_validation_error(error, context)
        if isinstance(error, (IngestError, FileNotFoundError)):
            return self.handle_input_error(error, context)
        if isinstance(error, (ModelInconsistencyError, QuboEncodingError, InstanceTooLargeError)):
            return self.handle_model_error(error, context)
        if isinstance(error, OSError):
            return self.handle_io_error(error, context)
        return self.handle_solver_error(error, context)

    def with_retry(self, operation: Callable, operation_id: str, *args, **kwargs) -> Any:
        """Execute an operation, retrying transient OS errors with a growing delay."""
        if operation_id not in self.retry_counts:
            self.retry_counts[operation_id] = 0

        while True:
            try:
                result = operation(*args, **kwargs)
                self.retry_counts[operation_id] = 0
                return result
            except OSError as e:
                self.retry_counts[operation_id] += 1

                if self.retry_counts[operation_id] >= self.max_retries:
                    self.logger.error(
                        f"Operation {operation_id} failed after {self.max_retries} retries: {str(e)}"
                    )
                    raise

                self.logger.warning(
                    f"Operation {operation_id} failed (attempt {self.retry_counts[operation_id]}), retrying in {self.retry_delay}s: {str(e)}"
                )
                time.sleep(self.retry_delay * self.retry_counts[operation_id])

    def reset_retry_count(self, operation_id: str) -> None:
        if operation_id in self.retry_counts:
            del self.retry_counts[operation_id]

    def _log_error(self, error: Exception, context: ErrorContext) -> None:
        """Log error with context information."""
        log_message = f"Error Type: {context.error_type.value} | "
        log_message += f"User Action: {context.user_action} | "
        log_message += f"Error: {str(error)}"

        if context.file_info:
            log_message += f" | File Info: {context.file_info}"

        if context.system_info:
            log_message += f" | System Info: {context.system_info}"

        if context.error_type in [ErrorType.SOLVER_ERROR, ErrorType.IO_ERROR]:
            self.logger.error(log_message)
        elif context.error_type in [ErrorType.MODEL_ERROR, ErrorType.VALIDATION_ERROR]:
            self.logger.warning(log_message)
        else:
            self.logger.info(log_message)

        if context.stack_trace:
            self.logger.debug(f"Stack trace: {context.stack_trace}")
