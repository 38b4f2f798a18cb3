"""
Отправка исключений в Sentry с контекстом запуска.

Без инициализированного Sentry функции ничего не делают.
"""

from typing import Optional, Dict, Any
import logging

import sentry_sdk

from .sentry_config import is_initialized

logger = logging.getLogger(__name__)


def capture_exception(
    error: BaseException,
    level: str = 'error',
    extra: Optional[Dict[str, Any]] = None,
    tags: Optional[Dict[str, str]] = None
) -> Optional[str]:
    """
    Захватить и отправить исключение в Sentry.

    Args:
        error: Исключение для отправки
        level: Уровень серьезности (fatal, error, warning, info, debug)
        extra: Дополнительные данные (контекст точки развертки)
        tags: Теги для группировки

    Returns:
        Event ID или None
    """
    if not is_initialized():
        return None

    with sentry_sdk.push_scope() as scope:
        scope.level = level
        for key, value in (extra or {}).items():
            scope.set_extra(key, value)
        for key, value in (tags or {}).items():
            scope.set_tag(key, value)
        event_id = sentry_sdk.capture_exception(error)

    logger.debug(f'Exception captured in Sentry: {event_id}')
    return event_id

