"""
Структурированный логгер для событий расчета.

Включает:
- JSON-сообщения с контекстом (run_id, подкоманда, точка развертки)
- Стек контекстов на contextvars, корректный для потоков и задач asyncio
- Интеграция с Sentry
"""

from typing import Optional, Dict, Any, Tuple
import contextvars
import json
import logging
import sys
from datetime import datetime, timezone


_context_stack: contextvars.ContextVar[Tuple[Dict[str, Any], ...]] = contextvars.ContextVar(
    'ethlab_log_context', default=()
)


def _json_default(value: Any) -> Any:
    # numpy скаляры и пути
    if hasattr(value, 'item'):
        return value.item()
    return str(value)


class StructuredLogger:
    """Класс для создания структурированных логов."""

    def __init__(
        self,
        name: str,
        default_context: Optional[Dict[str, Any]] = None
    ):
        """
        Инициализация структурированного логгера.

        Args:
            name: Имя логгера
            default_context: Контекст по умолчанию
        """
        self.logger = logging.getLogger(name)
        self.default_context = default_context or {}

    def _format_message(
        self,
        message: str,
        extra: Optional[Dict[str, Any]] = None,
        **kwargs
    ) -> str:
        structured = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'message': message,
        }
        structured.update(self.default_context)
        for context in _context_stack.get():
            structured.update(context)
        if extra:
            structured.update(extra)
        structured.update(kwargs)
        return json.dumps(structured, default=_json_default)

    def debug(self, message: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self.logger.debug(self._format_message(message, extra, **kwargs))

    def info(self, message: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self.logger.info(self._format_message(message, extra, **kwargs))

    def warning(self, message: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self.logger.warning(self._format_message(message, extra, **kwargs))

    def error(
        self,
        message: str,
        extra: Optional[Dict[str, Any]] = None,
        exc_info: bool = False,
        **kwargs
    ) -> None:
        """
        Логировать ERROR сообщение.

        Args:
            message: Сообщение
            extra: Дополнительные данные
            exc_info: Включить информацию об исключении и отправить его в Sentry
            **kwargs: Дополнительные поля
        """
        formatted = self._format_message(message, extra, **kwargs)
        self.logger.error(formatted, exc_info=exc_info)

        if exc_info:
            from monitoring.sentry import capture_exception
            exc_value = sys.exc_info()[1]
            if exc_value is not None:
                capture_exception(exc_value, level='error', extra=self.current_context())

    def exception(self, message: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self.error(message, extra, exc_info=True, **kwargs)

    @staticmethod
    def current_context() -> Dict[str, Any]:
        merged: Dict[str, Any] = {}
        for context in _context_stack.get():
            merged.update(context)
        return merged

    def with_context(self, **kwargs) -> 'LogContext':
        """
        Создать контекст, действующий внутри блока with.

        Example:
            with slog.with_context(subcommand='spectral', h=0.1):
                slog.info('Sweep point started')
        """
        return LogContext(**kwargs)


class LogContext:
    """Контекстный менеджер для временного контекста логирования (sync и async)."""

    def __init__(self, **context):
        self.context = context
        self._token: Optional[contextvars.Token] = None

    def __enter__(self):
        self._token = _context_stack.set(_context_stack.get() + (self.context,))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._token is not None:
            _context_stack.reset(self._token)
            self._token = None

    async def __aenter__(self):
        return self.__enter__()

    async def __aexit__(self, exc_type, exc_val, exc_tb):
        self.__exit__(exc_type, exc_val, exc_tb)


def get_structured_logger(name: str, **default_context) -> StructuredLogger:
    return StructuredLogger(name, default_context or None)
