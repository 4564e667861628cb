"""
Process memory sampling for benchmark rows.
"""

import threading
import time
from contextlib import contextmanager
from typing import Dict, Iterator, Optional

import psutil


class ResourceMonitor:
    """
    Samples the resident set size of the current process on a background
    thread while a block of work runs, and reports the peak.
    """

    def __init__(self, interval: float = 0.05):
        self.interval = interval
        self._process = psutil.Process()
        self._peak_rss = 0
        self._shutdown_event = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._lock = threading.Lock()

    def _sample(self) -> None:
        rss = self._process.memory_info().rss
        with self._lock:
            self._peak_rss = max(self._peak_rss, rss)

    def _monitor_loop(self) -> None:
        while not self._shutdown_event.wait(self.interval):
            try:
                self._sample()
            except psutil.Error:
                break

    @contextmanager
    def track(self) -> Iterator[Dict[str, float]]:
        """
        Track a block of work.

        Yields a dict that is filled with ``peak_rss_mb``, ``rss_delta_mb`` and
        ``elapsed_s`` when the block exits.
        """
        stats: Dict[str, float] = {}
        start_rss = self._process.memory_info().rss
        self._peak_rss = start_rss
        self._shutdown_event.clear()
        self._thread = threading.Thread(target=self._monitor_loop, daemon=True)
        self._thread.start()
        started = time.perf_counter()
        try:
            yield stats
        finally:
            self._shutdown_event.set()
            self._thread.join()
            self._sample()
            stats["elapsed_s"] = time.perf_counter() - started
            stats["peak_rss_mb"] = round(self._peak_rss / (1024 * 1024), 1)
            stats["rss_delta_mb"] = round((self._process.memory_info().rss - start_rss) / (1024 * 1024), 1)
