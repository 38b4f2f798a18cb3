import json
import logging

from monitoring import finalize_monitoring, setup_monitoring
from monitoring.logging import (
    RunContextFilter,
    clear_run_context,
    get_structured_logger,
    set_run_context,
    setup_logging,
)
from monitoring.metrics import PrometheusMetrics
from monitoring.performance import PerformanceProfiler, profile
from monitoring.sentry import capture_exception
from monitoring.sentry.sentry_config import before_send


def make_record(message: str = "m") -> logging.LogRecord:
    return logging.LogRecord("ethlab.test", logging.INFO, __file__, 1, message, None, None)


def test_run_context_filter():
    """Фильтр добавляет run_id и config_hash к записи"""
    set_run_context("abc123", "f" * 64)
    record = make_record()

    assert RunContextFilter().filter(record)
    assert record.run_id == "abc123"
    assert record.config_hash == "f" * 64

    clear_run_context()
    RunContextFilter().filter(record)
    assert record.run_id == "-"


def test_setup_logging_without_files(tmp_path):
    """to_file = False не создает каталог логов"""
    setup_logging(log_level="DEBUG", log_dir=str(tmp_path / "logs"), to_file=False)

    app_logger = logging.getLogger("ethlab")
    assert app_logger.level == logging.DEBUG
    assert not app_logger.propagate
    assert not (tmp_path / "logs").exists()
    assert all(not isinstance(h, logging.FileHandler) for h in app_logger.handlers)


def test_setup_logging_writes_json_file(tmp_path):
    """Логгеры пакетов пишут JSON с run_id в файл"""
    setup_logging(log_level="INFO", log_dir=str(tmp_path), to_file=True)
    set_run_context("run-42", "cafe")

    logging.getLogger("ethlab.services").info("table written")
    for handler in logging.getLogger("ethlab").handlers:
        handler.flush()

    lines = (tmp_path / "ethlab.json").read_text(encoding="utf-8").splitlines()
    entry = json.loads(lines[-1])
    assert entry["message"] == "table written"
    assert entry["run_id"] == "run-42"
    assert entry["config_hash"] == "cafe"


def test_structured_logger_context(caplog):
    """Контекст with_context попадает в сообщение и снимается после блока"""
    slog = get_structured_logger("ethlab.sweep_test", component="sweep")

    with caplog.at_level(logging.INFO, logger="ethlab.sweep_test"):
        with slog.with_context(subcommand="eth", h=0.4):
            slog.info("point started", tables=3)
        slog.info("outside")

    inside, outside = (json.loads(r.getMessage()) for r in caplog.records)
    assert inside["subcommand"] == "eth"
    assert inside["h"] == 0.4
    assert inside["tables"] == 3
    assert inside["component"] == "sweep"
    assert "subcommand" not in outside


def test_metrics_textfile(tmp_path):
    """Метрики записываются в текстовом формате Prometheus"""
    PrometheusMetrics.increment_tables_written("fig2a_nnsd")
    path = tmp_path / "metrics" / "ethlab.prom"

    PrometheusMetrics.write_textfile(path)

    text = path.read_text()
    assert 'ethlab_tables_written_total{family="fig2a_nnsd"}' in text


def test_finalize_monitoring_writes_textfile(settings_env, monkeypatch):
    """finalize_monitoring пишет метрики, только если задан PROMETHEUS_TEXTFILE"""
    from config.settings import Settings

    target = settings_env / "run.prom"
    finalize_monitoring(Settings())
    assert not target.exists()

    monkeypatch.setenv("PROMETHEUS_TEXTFILE", str(target))
    finalize_monitoring(Settings())
    assert target.exists()


def test_setup_monitoring_sets_run_context(settings):
    """setup_monitoring настраивает логи и контекст запуска"""
    setup_monitoring(settings, "run-7", "hash")
    record = make_record()

    RunContextFilter().filter(record)

    assert record.run_id == "run-7"


def test_profiler_measures_duration():
    """Профилировщик измеряет время и прирост памяти"""
    with PerformanceProfiler("unit.block", trace_memory=True) as profiler:
        data = [0.0] * 100_000

    assert profiler.duration > 0
    assert profiler.memory_used is not None and profiler.memory_used > 0
    assert len(data) == 100_000


def test_profile_decorator_keeps_result():
    """@profile не меняет результат функции"""
    @profile
    def square(x):
        return x * x

    assert square(7) == 49
    assert square.__name__ == "square"


def test_capture_exception_without_sentry():
    """Без инициализации Sentry исключения не отправляются"""
    assert capture_exception(RuntimeError("boom")) is None


def test_before_send_drops_user_errors():
    """Ошибки конфигурации не уходят в Sentry, переменные окружения вырезаются"""
    from ethlab.errors import ComputationError, ConfigurationError

    dropped = before_send({}, {"exc_info": (ConfigurationError, ConfigurationError("x"), None)})
    event = {"contexts": {"runtime": {"name": "CPython", "env": {"SECRET": "1"}}}}
    kept = before_send(event, {"exc_info": (ComputationError, ComputationError("x"), None)})

    assert dropped is None
    assert kept["contexts"]["runtime"] == {"name": "CPython"}
