"""
Профилировщик производительности.

Предоставляет декоратор @profile для измерения времени выполнения
и (по запросу) прироста памяти функций.
"""

import functools
import logging
import time
import tracemalloc
from typing import Callable, Optional

from monitoring.metrics.prometheus_metrics import (
    function_duration_histogram,
    function_memory_gauge
)

logger = logging.getLogger(__name__)


class PerformanceProfiler:
    """
    Профилировщик участка кода.

    Измеряет:
    - Время выполнения
    - Прирост памяти (если trace_memory=True; tracemalloc замедляет numpy)
    - Экспортирует метрики в Prometheus
    """

    def __init__(self, func_name: str, trace_memory: bool = False):
        """
        Args:
            func_name: Имя функции для профилирования
            trace_memory: Включить tracemalloc
        """
        self.func_name = func_name
        self.trace_memory = trace_memory
        self.start_time = 0.0
        self.start_memory = 0
        self.duration = 0.0
        self.memory_used: Optional[int] = None
        self._owns_tracing = False

    def __enter__(self):
        self.start_time = time.perf_counter()
        if self.trace_memory:
            # вложенный профилировщик не останавливает трассировку внешнего
            self._owns_tracing = not tracemalloc.is_tracing()
            if self._owns_tracing:
                tracemalloc.start()
            self.start_memory = tracemalloc.get_traced_memory()[0]
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start_time

        memory_note = ""
        if self.trace_memory:
            current_memory, _ = tracemalloc.get_traced_memory()
            self.memory_used = current_memory - self.start_memory
            if self._owns_tracing:
                tracemalloc.stop()
            memory_note = f", memory={self.memory_used / 1024 / 1024:.2f}MB"

        logger.info(f"Performance [{self.func_name}]: duration={self.duration:.3f}s{memory_note}")

        try:
            function_duration_histogram.labels(function=self.func_name).observe(self.duration)
            if self.memory_used is not None:
                function_memory_gauge.labels(function=self.func_name).set(self.memory_used)
        except Exception as e:
            logger.warning(f"Ошибка экспорта метрик: {e}")


def profile(func: Optional[Callable] = None, *, trace_memory: bool = False) -> Callable:
    """
    Декоратор для профилирования функций.

    Example:
        @profile
        def diagonalize(...): ...
    """
    def decorator(target: Callable) -> Callable:
        func_name = f"{target.__module__}.{target.__name__}"

        @functools.wraps(target)
        def sync_wrapper(*args, **kwargs):
            with PerformanceProfiler(func_name, trace_memory):
                return target(*args, **kwargs)
        return sync_wrapper

    if func is not None:
        return decorator(func)
    return decorator
