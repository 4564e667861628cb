"""
Unit tests for run logging and resource monitoring.
"""

import logging

from src.utils.resource_monitor import ResourceMonitor
from src.utils.run_logging import RunFormatter, RunLogger, get_run_logger


class TestRunFormatter:
    """Test float trimming in log lines."""

    def test_long_floats_trimmed(self):
        formatter = RunFormatter("%(message)s")
        record = logging.LogRecord("t", logging.INFO, __file__, 1, "Objective: 4694.400000000001", None, None)
        assert formatter.format(record) == "Objective: 4694.4"

    def test_short_floats_untouched(self):
        formatter = RunFormatter("%(message)s")
        record = logging.LogRecord("t", logging.INFO, __file__, 1, "Time: 0.25s, Gap: 0.000250", None, None)
        assert formatter.format(record) == "Time: 0.25s, Gap: 0.000250"


class TestRunLogger:
    """Test event-shaped log methods."""

    def test_run_ids_are_unique(self):
        logger = RunLogger("fleetopt.test.ids")
        first = logger.log_solve_start("a", "blp", "exact")
        second = logger.log_solve_start("b", "blp", "anneal")
        assert first.startswith("run_")
        assert first != second

    def test_solve_complete_logged(self, caplog):
        logger = RunLogger("fleetopt.test.complete")
        with caplog.at_level(logging.INFO, logger="fleetopt.test.complete"):
            logger.log_solve_complete("run_1", "Optimal", 12.5, 0.1234)
        assert "Status: Optimal" in caplog.text
        assert "Time: 0.12s" in caplog.text

    def test_file_log_written(self, tmp_path):
        logger = RunLogger("fleetopt.test.file", log_dir=str(tmp_path))
        logger.log_file_operation("save_instance", "/tmp/x", True)
        for handler in logger.logger.handlers:
            handler.flush()
        assert "save_instance" in (tmp_path / "fleetopt.log").read_text()

    def test_global_logger_is_shared(self):
        assert get_run_logger() is get_run_logger()


class TestResourceMonitor:
    """Test peak memory tracking."""

    def test_track_fills_stats(self):
        monitor = ResourceMonitor(interval=0.01)
        with monitor.track() as stats:
            block = bytearray(4 * 1024 * 1024)
        assert len(block) > 0
        assert stats["peak_rss_mb"] > 0
        assert stats["elapsed_s"] >= 0
        assert "rss_delta_mb" in stats
