import pytest

from config.settings import Settings, get_settings, reset_settings


def test_defaults(settings_env):
    """Значения по умолчанию и путь к базе кэша"""
    settings = Settings()

    assert settings.LOG_LEVEL == "INFO"
    assert settings.ETHLAB_THREADS is None
    assert settings.CACHE_ENABLED
    assert settings.DATABASE_URL == f"sqlite:///{settings_env / 'cache' / 'spectra.db'}"


def test_log_level_is_normalized(settings_env, monkeypatch):
    """Уровень логирования приводится к верхнему регистру"""
    monkeypatch.setenv("LOG_LEVEL", " debug ")

    assert Settings().LOG_LEVEL == "DEBUG"


def test_unknown_log_level_rejected(settings_env, monkeypatch):
    """Неизвестный уровень логирования"""
    monkeypatch.setenv("LOG_LEVEL", "CHATTY")

    with pytest.raises(ValueError):
        Settings()


@pytest.mark.parametrize("value, expected", [("", None), ("4", 4)])
def test_threads_from_environment(settings_env, monkeypatch, value, expected):
    """Пустая строка в ETHLAB_THREADS означает значение по умолчанию"""
    monkeypatch.setenv("ETHLAB_THREADS", value)

    assert Settings().ETHLAB_THREADS == expected


def test_non_positive_threads_rejected(settings_env, monkeypatch):
    """ETHLAB_THREADS = 0"""
    monkeypatch.setenv("ETHLAB_THREADS", "0")

    with pytest.raises(ValueError):
        Settings()


def test_get_settings_is_cached(settings_env):
    """get_settings возвращает один экземпляр до reset_settings"""
    first = get_settings()

    assert get_settings() is first
    reset_settings()
    assert get_settings() is not first


def test_invalid_environment_exits(settings_env, monkeypatch):
    """Ошибка проверки настроек завершает процесс"""
    monkeypatch.setenv("ETHLAB_THREADS", "many")

    with pytest.raises(SystemExit):
        get_settings()
