"""
Prometheus метрики расчетов.

Включает метрики для:
- Диагонализаций и их длительности
- Попаданий в кэш спектров
- Записанных таблиц результатов
- Ошибок

Процесс короткоживущий, поэтому метрики не отдаются по HTTP, а
записываются в текстовый файл в конце запуска (write_textfile).
"""

from pathlib import Path
from typing import Union
from prometheus_client import Counter, Histogram, Gauge, CollectorRegistry, generate_latest, write_to_textfile


DURATION_BUCKETS = (0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0, 1800.0)


class PrometheusMetrics:
    """Класс для управления Prometheus метриками."""

    # Реестр метрик
    registry = CollectorRegistry()

    # Counter метрики
    eigendecompositions_total = Counter(
        'ethlab_eigendecompositions_total',
        'Количество полных диагонализаций',
        ['kind'],
        registry=registry
    )

    cache_hits_total = Counter(
        'ethlab_cache_hits_total',
        'Попадания в кэш спектров',
        ['tier'],
        registry=registry
    )

    cache_misses_total = Counter(
        'ethlab_cache_misses_total',
        'Промахи кэша спектров',
        registry=registry
    )

    tables_written_total = Counter(
        'ethlab_tables_written_total',
        'Количество записанных таблиц результатов',
        ['family'],
        registry=registry
    )

    errors_total = Counter(
        'ethlab_errors_total',
        'Общее количество ошибок',
        ['error_type', 'module'],
        registry=registry
    )

    # Histogram метрики
    eigh_duration_seconds = Histogram(
        'ethlab_eigh_duration_seconds',
        'Длительность диагонализации',
        ['kind'],
        buckets=DURATION_BUCKETS,
        registry=registry
    )

    sweep_point_duration_seconds = Histogram(
        'ethlab_sweep_point_duration_seconds',
        'Длительность обработки точки развертки',
        ['subcommand'],
        buckets=DURATION_BUCKETS,
        registry=registry
    )

    function_duration_seconds = Histogram(
        'ethlab_function_duration_seconds',
        'Длительность профилируемых функций',
        ['function'],
        buckets=DURATION_BUCKETS,
        registry=registry
    )

    # Gauge метрики
    matrix_dimension = Gauge(
        'ethlab_matrix_dimension',
        'Размерность последней диагонализованной матрицы',
        ['kind'],
        registry=registry
    )

    function_memory_bytes = Gauge(
        'ethlab_function_memory_bytes',
        'Прирост памяти профилируемой функции',
        ['function'],
        registry=registry
    )

    @classmethod
    def increment_eigendecompositions(cls, kind: str) -> None:
        cls.eigendecompositions_total.labels(kind=kind).inc()

    @classmethod
    def increment_cache_hit(cls, tier: str) -> None:
        cls.cache_hits_total.labels(tier=tier).inc()

    @classmethod
    def increment_cache_miss(cls) -> None:
        cls.cache_misses_total.inc()

    @classmethod
    def increment_tables_written(cls, family: str) -> None:
        cls.tables_written_total.labels(family=family).inc()

    @classmethod
    def increment_errors(cls, error_type: str, module: str) -> None:
        cls.errors_total.labels(error_type=error_type, module=module).inc()

    @classmethod
    def observe_eigh(cls, kind: str, dim: int, duration: float) -> None:
        cls.eigh_duration_seconds.labels(kind=kind).observe(duration)
        cls.matrix_dimension.labels(kind=kind).set(dim)

    @classmethod
    def observe_sweep_point(cls, subcommand: str, duration: float) -> None:
        cls.sweep_point_duration_seconds.labels(subcommand=subcommand).observe(duration)

    @classmethod
    def eigendecomposition_count(cls, kind: str) -> float:
        """Текущее значение счетчика диагонализаций (используется в тестах кэша)."""
        value = cls.registry.get_sample_value('ethlab_eigendecompositions_total', {'kind': kind})
        return value or 0.0

    @classmethod
    def get_metrics(cls) -> bytes:
        """Получить метрики в формате Prometheus."""
        return generate_latest(cls.registry)

    @classmethod
    def write_textfile(cls, path: Union[str, Path]) -> None:
        """
        Записать метрики в файл для node_exporter textfile collector.

        Args:
            path: Путь к .prom файлу
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_to_textfile(str(path), cls.registry)


function_duration_histogram = PrometheusMetrics.function_duration_seconds
function_memory_gauge = PrometheusMetrics.function_memory_bytes
