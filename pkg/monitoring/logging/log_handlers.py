"""
Фильтры логов.

RunContextFilter добавляет к каждой записи идентификатор запуска и хэш
конфигурации, чтобы JSON-логи запуска можно было сопоставить с
записанными им таблицами результатов.
"""

from typing import Any, Dict, Optional
import logging
import threading


_run_context: Dict[str, Any] = {'run_id': '-', 'config_hash': '-'}
_run_context_lock = threading.Lock()


def set_run_context(run_id: str, config_hash: Optional[str] = None) -> None:
    """
    Установить контекст текущего запуска.

    Args:
        run_id: Идентификатор запуска
        config_hash: SHA-256 конфигурации эксперимента
    """
    with _run_context_lock:
        _run_context['run_id'] = run_id
        _run_context['config_hash'] = config_hash or '-'


def clear_run_context() -> None:
    set_run_context('-', None)


class RunContextFilter(logging.Filter):
    """Фильтр, добавляющий run_id и config_hash в запись лога."""

    def filter(self, record: logging.LogRecord) -> bool:
        with _run_context_lock:
            record.run_id = _run_context['run_id']
            record.config_hash = _run_context['config_hash']
        return True
