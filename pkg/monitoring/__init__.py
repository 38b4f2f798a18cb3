"""
Модуль мониторинга и логирования для ethlab.

Включает:
- Prometheus метрики (текстовый файл)
- Sentry интеграцию
- Структурированное логирование
- Профилирование
"""

from .monitor import setup_monitoring, finalize_monitoring

__all__ = ['setup_monitoring', 'finalize_monitoring']
