import logging
import os
import time
from collections import deque
from typing import Deque, Dict, Optional

import psutil

logger = logging.getLogger(__name__)


class RunMonitor:
    """Monitor wall time, throughput and memory of a run; reports go to the log only"""

    def __init__(self, label: str, max_samples: int = 100):
        self.label = label
        self.stage_times: Deque[float] = deque(maxlen=max_samples)
        self.memory_usage: Deque[float] = deque(maxlen=max_samples)
        self.start_time = time.perf_counter()
        self.samples_done = 0
        self._stage_start: Optional[float] = None

    def record_system_metrics(self) -> None:
        """Record resident memory of this process"""
        try:
            process = psutil.Process(os.getpid())
            self.memory_usage.append(process.memory_info().rss / 1024 / 1024)  # MB
        except psutil.Error as e:
            logger.debug(f"Failed to record system metrics: {e}")

    def start_stage(self) -> None:
        self._stage_start = time.perf_counter()

    def end_stage(self, samples: int) -> None:
        if self._stage_start is not None:
            self.stage_times.append(time.perf_counter() - self._stage_start)
            self._stage_start = None
        self.samples_done += samples
        self.record_system_metrics()

    def get_stats(self) -> Dict[str, float]:
        elapsed = time.perf_counter() - self.start_time
        return {
            "elapsed_seconds": elapsed,
            "samples": float(self.samples_done),
            "samples_per_second": self.samples_done / elapsed if elapsed > 0 else 0.0,
            "peak_memory_mb": max(self.memory_usage) if self.memory_usage else 0.0,
            "cpu_count": float(psutil.cpu_count(logical=True) or 1),
        }

    def log_summary(self) -> None:
        self.record_system_metrics()
        stats = self.get_stats()
        logger.info(
            f"{self.label}: {stats['samples']:.0f} samples in {stats['elapsed_seconds']:.2f}s "
            f"({stats['samples_per_second']:.1f}/s), peak memory {stats['peak_memory_mb']:.1f} MB"
        )

    def __enter__(self) -> "RunMonitor":
        self.record_system_metrics()
        return self

    def __exit__(self, *exc: object) -> None:
        self.log_summary()
