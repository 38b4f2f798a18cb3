"""
Инициализация мониторинга для одного запуска CLI.

Включает:
- Настройку логирования
- Инициализацию Sentry
- Запись метрик Prometheus в текстовый файл по завершении
"""

import logging
from typing import Optional

from ethlab import __version__

from .logging import setup_logging, set_run_context
from .metrics import PrometheusMetrics
from .sentry import init_sentry

logger = logging.getLogger(__name__)


def setup_monitoring(settings, run_id: str, config_hash: Optional[str] = None) -> None:
    """
    Инициализация всех компонентов мониторинга.

    Args:
        settings: Экземпляр config.settings.Settings
        run_id: Идентификатор запуска
        config_hash: SHA-256 конфигурации эксперимента
    """
    setup_logging(
        log_level=settings.LOG_LEVEL,
        log_dir=settings.LOG_DIR,
        use_json=settings.LOG_JSON,
        to_file=settings.LOG_TO_FILE,
    )
    set_run_context(run_id, config_hash)

    if settings.SENTRY_ENABLED:
        init_sentry(
            dsn=settings.SENTRY_DSN,
            environment=settings.SENTRY_ENVIRONMENT,
            traces_sample_rate=settings.SENTRY_TRACES_SAMPLE_RATE,
            release=f'ethlab@{__version__}',
        )

    logger.debug(f'Monitoring initialized for run {run_id}')


def finalize_monitoring(settings) -> None:
    """Записать метрики запуска, если задан PROMETHEUS_TEXTFILE."""
    if not (settings.PROMETHEUS_ENABLED and settings.PROMETHEUS_TEXTFILE):
        return
    try:
        PrometheusMetrics.write_textfile(settings.PROMETHEUS_TEXTFILE)
        logger.info(f'Metrics written to {settings.PROMETHEUS_TEXTFILE}')
    except OSError as e:
        logger.warning(f'Cannot write metrics textfile {settings.PROMETHEUS_TEXTFILE}: {e}')
