"""
Модуль мониторинга производительности расчетов.
"""

from .profiler import profile, PerformanceProfiler

__all__ = ['profile', 'PerformanceProfiler']
