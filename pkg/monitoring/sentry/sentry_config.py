"""
Конфигурация Sentry для отслеживания ошибок расчетов.

Настраивает:
- Инициализацию Sentry SDK
- Environment и release
- Удаление локальных путей из событий
"""

from typing import Optional, Dict, Any, List
import logging

import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration
from sentry_sdk.integrations.sqlalchemy import SqlalchemyIntegration

logger = logging.getLogger(__name__)

_initialized = False

# Ошибки пользователя (неверная конфигурация, невыполнимые параметры) в Sentry не отправляются
DEFAULT_IGNORED_ERRORS = ['ConfigurationError', 'FeasibilityError', 'KeyboardInterrupt']


def before_send(event: Dict[str, Any], hint: Dict[str, Any]) -> Optional[Dict[str, Any]]:
    """
    Обработчик событий перед отправкой в Sentry.

    Отбрасывает ошибки пользователя и убирает переменные окружения.
    """
    exc_info = hint.get('exc_info')
    if exc_info and exc_info[0].__name__ in DEFAULT_IGNORED_ERRORS:
        return None
    contexts = event.get('contexts', {})
    if isinstance(contexts.get('runtime'), dict):
        contexts['runtime'].pop('env', None)
    return event


def init_sentry(
    dsn: Optional[str],
    environment: str = 'research',
    traces_sample_rate: float = 0.0,
    release: Optional[str] = None,
    ignored_errors: Optional[List[str]] = None,
    debug: bool = False
) -> bool:
    """
    Инициализация Sentry SDK.

    Args:
        dsn: Sentry DSN; без него Sentry не включается
        environment: Окружение
        traces_sample_rate: Доля трассировок (0.0 - 1.0)
        release: Версия релиза
        ignored_errors: Имена типов ошибок для игнорирования
        debug: Режим отладки

    Returns:
        True, если Sentry инициализирован
    """
    global _initialized
    if not dsn:
        logger.warning('Sentry DSN not provided, Sentry will not be initialized')
        return False

    sentry_logging = LoggingIntegration(
        level=logging.INFO,
        event_level=logging.ERROR
    )

    sentry_sdk.init(
        dsn=dsn,
        environment=environment,
        release=release,
        traces_sample_rate=traces_sample_rate,
        integrations=[sentry_logging, SqlalchemyIntegration()],
        before_send=before_send,
        ignore_errors=ignored_errors or list(DEFAULT_IGNORED_ERRORS),
        send_default_pii=False,
        debug=debug
    )
    _initialized = True

    logger.info(f'Sentry initialized: environment={environment}, release={release}')
    return True


def is_initialized() -> bool:
    return _initialized
