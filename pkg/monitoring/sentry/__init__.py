"""
Модуль интеграции с Sentry для отслеживания ошибок.
"""

from .sentry_config import init_sentry, is_initialized
from .error_handler import capture_exception

__all__ = [
    'init_sentry',
    'is_initialized',
    'capture_exception',
]
