"""
Unit tests for the ErrorHandler class.
"""

from unittest.mock import Mock, patch

import pytest

from src.utils.error_handler import (
    EXIT_FAILURE,
    EXIT_USAGE,
    ErrorHandler,
    ErrorSeverity,
    IngestError,
    InstanceTooLargeError,
    InstanceValidationError,
    ModelInconsistencyError,
    PipelineError,
    QuboEncodingError,
    UserMessage,
)


class TestErrorHandler:
    """Test cases for ErrorHandler class."""

    @pytest.fixture
    def error_handler(self):
        """Create an ErrorHandler instance for testing."""
        return ErrorHandler("test_logger")

    @pytest.fixture
    def mock_logger(self, error_handler):
        """Mock the logger for testing."""
        with patch.object(error_handler, 'logger') as mock_log:
            yield mock_log

    def test_initialization(self, error_handler):
        assert error_handler.max_retries == 3
        assert isinstance(error_handler.retry_counts, dict)
        assert len(error_handler.retry_counts) == 0

    def test_missing_instance_file(self, error_handler, mock_logger):
        result = error_handler.handle_input_error(FileNotFoundError("fleet.csv"))

        assert isinstance(result, UserMessage)
        assert result.title == "Instance File Missing"
        assert result.exit_code == EXIT_FAILURE
        mock_logger.info.assert_called()

    def test_model_error_too_large(self, error_handler, mock_logger):
        result = error_handler.handle_model_error(InstanceTooLargeError("40 bits"))

        assert result.title == "Instance Too Large"
        assert result.severity == ErrorSeverity.MEDIUM
        mock_logger.warning.assert_called()

    def test_usage_error_exit_code(self, error_handler, mock_logger):
        result = error_handler.handle_usage_error("unknown backend 'x'")

        assert result.exit_code == EXIT_USAGE
        assert "unknown backend" in result.message

    @pytest.mark.parametrize("error,title", [
        (InstanceValidationError("bad"), "Validation Error"),
        (IngestError("bad row"), "Invalid Instance Data"),
        (ModelInconsistencyError("multi-day"), "Model Error"),
        (QuboEncodingError("unbounded"), "Model Error"),
        (PermissionError("read-only"), "Write Failed"),
        (RuntimeError("boom"), "Solver Failure"),
    ])
    def test_dispatch(self, error_handler, mock_logger, error, title):
        result = error_handler.handle(error, {"stage": "test"})
        assert result.title == title
        assert result.exit_code == EXIT_FAILURE

    def test_with_retry_success_first_attempt(self, error_handler):
        mock_operation = Mock(return_value="success")

        result = error_handler.with_retry(mock_operation, "test_op")

        assert result == "success"
        assert mock_operation.call_count == 1
        assert error_handler.retry_counts["test_op"] == 0

    def test_with_retry_recovers_from_transient_os_error(self, error_handler):
        mock_operation = Mock(side_effect=[OSError("busy"), "ok"])

        with patch('time.sleep'):
            result = error_handler.with_retry(mock_operation, "test_op")

        assert result == "ok"
        assert mock_operation.call_count == 2

    def test_with_retry_max_retries_exceeded(self, error_handler):
        mock_operation = Mock(side_effect=OSError("persistent failure"))

        with patch('time.sleep'):
            with pytest.raises(OSError):
                error_handler.with_retry(mock_operation, "test_op")

        assert mock_operation.call_count == error_handler.max_retries

    def test_with_retry_does_not_retry_other_errors(self, error_handler):
        mock_operation = Mock(side_effect=ValueError("logic"))

        with pytest.raises(ValueError):
            error_handler.with_retry(mock_operation, "test_op")
        assert mock_operation.call_count == 1

    def test_reset_retry_count(self, error_handler):
        error_handler.retry_counts["test_op"] = 2
        error_handler.reset_retry_count("test_op")
        assert "test_op" not in error_handler.retry_counts

    def test_pipeline_error_carries_message(self, error_handler):
        message = error_handler.handle_usage_error("no such command")
        error = PipelineError(message)
        assert error.user_message is message
        assert str(error) == "no such command"
