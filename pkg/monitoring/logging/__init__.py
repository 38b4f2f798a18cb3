"""
Модуль структурированного логирования.
"""

from .logger_config import setup_logging, get_logger
from .structured_logger import StructuredLogger, LogContext, get_structured_logger
from .log_handlers import RunContextFilter, set_run_context, clear_run_context

__all__ = [
    'setup_logging',
    'get_logger',
    'StructuredLogger',
    'LogContext',
    'get_structured_logger',
    'RunContextFilter',
    'set_run_context',
    'clear_run_context',
]
