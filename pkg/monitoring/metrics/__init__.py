"""
Модуль метрик Prometheus для мониторинга расчетов.
"""

from .prometheus_metrics import PrometheusMetrics

__all__ = ['PrometheusMetrics']
