"""
Worker для параллельной обработки точек развертки.

Точки (значения h или U/J) выполняются в потоках через asyncio.to_thread,
число одновременных точек ограничено семафором. NumPy и LAPACK
освобождают GIL, поэтому потоки действительно считают параллельно.
Результаты возвращаются в порядке развертки.
"""

import asyncio
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, List, Sequence

from monitoring.logging import get_structured_logger
from monitoring.metrics import PrometheusMetrics

logger = logging.getLogger(__name__)
slog = get_structured_logger(__name__)


@dataclass(frozen=True)
class SweepPoint:
    subcommand: str
    param: str
    value: float
    compute: Callable[[], List[Any]] = field(repr=False, compare=False)

    @property
    def tag(self) -> str:
        return f"{self.param}={self.value:g}"


@dataclass(frozen=True)
class SweepResult:
    point: SweepPoint
    tables: List[Any]
    duration: float


class SweepWorker:
    """
    Worker развертки.

    Каждая точка владеет своими матрицами; общий только кэш спектров,
    который потокобезопасен.
    """

    def __init__(self, max_workers: int = 1):
        """
        Args:
            max_workers: Число точек, обрабатываемых одновременно
        """
        if max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {max_workers}")
        self.max_workers = max_workers

    async def _run_point(self, point: SweepPoint, semaphore: asyncio.Semaphore) -> SweepResult:
        async with semaphore:
            with slog.with_context(subcommand=point.subcommand, **{point.param: point.value}):
                slog.info('Sweep point started')
                start = time.perf_counter()
                try:
                    tables = await asyncio.to_thread(point.compute)
                except Exception as e:
                    PrometheusMetrics.increment_errors(type(e).__name__, __name__)
                    slog.error(f'Sweep point failed: {e}')
                    raise
                duration = time.perf_counter() - start
                PrometheusMetrics.observe_sweep_point(point.subcommand, duration)
                slog.info('Sweep point finished', duration=round(duration, 3), tables=len(tables))
                return SweepResult(point=point, tables=tables, duration=duration)

    async def run(self, points: Sequence[SweepPoint]) -> List[SweepResult]:
        """
        Обработать точки развертки.

        Args:
            points: Точки в порядке развертки

        Returns:
            Результаты в том же порядке

        Raises:
            Exception: Первая ошибка точки; остальные точки дорабатывают в своих потоках
        """
        if not points:
            return []
        semaphore = asyncio.Semaphore(self.max_workers)
        logger.info(f"SweepWorker: {len(points)} точек, потоков: {self.max_workers}")
        return list(await asyncio.gather(*(self._run_point(p, semaphore) for p in points)))
