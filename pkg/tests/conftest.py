import logging
import math
from pathlib import Path

import numpy as np
import pytest

from config.settings import Settings, reset_settings
from db import database_setup
from ethlab.app.cli import EXIT_OK, main
from ethlab.rmt import goe_spectrum, poisson_spectrum
from monitoring.logging.logger_config import APP_LOGGERS
from monitoring.logging.log_handlers import clear_run_context


@pytest.fixture
def rng():
    """Генератор с фиксированным зерном"""
    return np.random.default_rng(20240611)


@pytest.fixture
def goe_levels(rng):
    """Спектр GOE размера 2000"""
    return goe_spectrum(2000, rng)


@pytest.fixture
def poisson_levels(rng):
    """Пуассоновский спектр из 2000 уровней"""
    return poisson_spectrum(2000, rng)


@pytest.fixture
def settings_env(tmp_path: Path, monkeypatch):
    """Переменные окружения, изолирующие кэш и логи во временной папке"""
    monkeypatch.setenv("CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("LOG_TO_FILE", "false")
    monkeypatch.setenv("SENTRY_ENABLED", "false")
    monkeypatch.delenv("ETHLAB_THREADS", raising=False)
    monkeypatch.delenv("PROMETHEUS_TEXTFILE", raising=False)
    reset_settings()
    yield tmp_path
    reset_settings()
    database_setup.dispose_engine()


@pytest.fixture
def settings(settings_env) -> Settings:
    """Настройки с кэшем во временной папке"""
    return Settings()


@pytest.fixture
def no_cache_settings(settings_env, monkeypatch) -> Settings:
    """Настройки без дискового кэша"""
    monkeypatch.setenv("CACHE_ENABLED", "false")
    return Settings()


def write_config(path: Path, L: int = 10, h_values=(0.1, 0.4), out: Path = None, extra: str = "") -> Path:
    """Минимальная TOML-конфигурация для быстрых прогонов"""
    out_line = f'directory = "{out.as_posix()}"\n' if out is not None else ""
    path.write_text(
        "[model.xxz]\n"
        f"L = {L}\n"
        f"Delta = {math.pi / 4!r}\n"
        "\n[sweep]\n"
        f"h_values = [{', '.join(repr(h) for h in h_values)}]\n"
        "uj_values = [1.8]\n"
        "seed = 7\n"
        "\n[output]\n"
        f"{out_line}"
        f"{extra}",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def make_config():
    """Фабрика TOML-конфигураций"""
    return write_config


def reset_logging(root_handlers, root_level) -> None:
    """Снимает обработчики, добавленные setup_logging, и возвращает логгеры пакетов к умолчаниям"""
    root = logging.getLogger()
    for handler in [h for h in root.handlers if h not in root_handlers]:
        root.removeHandler(handler)
        handler.close()
    root.setLevel(root_level)
    for name in APP_LOGGERS + ("sqlalchemy",):
        app_logger = logging.getLogger(name)
        for handler in list(app_logger.handlers):
            app_logger.removeHandler(handler)
            handler.close()
        app_logger.propagate = True
        app_logger.setLevel(logging.NOTSET)
    clear_run_context()


@pytest.fixture(autouse=True)
def _restore_logging():
    """Возвращает логгеры пакетов к состоянию по умолчанию после setup_logging"""
    root = logging.getLogger()
    root_handlers, root_level = list(root.handlers), root.level
    yield
    reset_logging(root_handlers, root_level)


CROSSOVER_H_VALUES = (0.01, 0.1, 0.7)
CROSSOVER_UJ_VALUES = (0.02, 0.4, 1.8, 9.0)


@pytest.fixture(scope="module")
def crossover_results(tmp_path_factory):
    """Один прогон all при L = 12 (и Бозе-Хаббард L = N = 8) на сетках h и U/J; каталог таблиц"""
    root = tmp_path_factory.mktemp("crossover")
    out = root / "results"
    config = root / "run.toml"
    config.write_text(
        "[model.xxz]\n"
        "L = 12\n"
        f"Delta = {math.pi / 4!r}\n"
        "\n[model.bose_hubbard]\n"
        "L = 8\n"
        "N = 8\n"
        'observable = "half_chain_occupation"\n'
        "\n[sweep]\n"
        f"h_values = [{', '.join(repr(h) for h in CROSSOVER_H_VALUES)}]\n"
        f"uj_values = [{', '.join(repr(u) for u in CROSSOVER_UJ_VALUES)}]\n"
        "seed = 7\n"
        "\n[analysis]\n"
        "ratio_bins = 10\n"
        "\n[output]\n"
        f'directory = "{out.as_posix()}"\n',
        encoding="utf-8",
    )

    root_logger = logging.getLogger()
    root_handlers, root_level = list(root_logger.handlers), root_logger.level
    with pytest.MonkeyPatch.context() as mp:
        mp.setenv("CACHE_DIR", str(root / "cache"))
        mp.setenv("LOG_DIR", str(root / "logs"))
        mp.setenv("LOG_TO_FILE", "false")
        mp.setenv("SENTRY_ENABLED", "false")
        mp.delenv("ETHLAB_THREADS", raising=False)
        mp.delenv("PROMETHEUS_TEXTFILE", raising=False)
        reset_settings()
        try:
            code = main(["all", "--config", str(config), "--threads", "3"])
        finally:
            reset_settings()
            database_setup.dispose_engine()
            reset_logging(root_handlers, root_level)

    assert code == EXIT_OK
    return out
