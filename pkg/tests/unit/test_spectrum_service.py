import logging
from pathlib import Path

import numpy as np
import pytest

from config.settings import Settings
from db.dal import spectrum_dal
from ethlab.models import BoseHubbardParams, XxzParams
from ethlab.services.spectrum_service import KEY_LOCK_STRIPES, SpectrumService, spectrum_key
from monitoring.metrics import PrometheusMetrics


def test_key_is_canonical():
    """Ключ не зависит от порядка параметров и меняется вместе с ними"""
    a = spectrum_key("xxz", {"L": 4, "h": 0.1, "J": 1.0})
    b = spectrum_key("xxz", {"J": 1.0, "h": 0.1, "L": 4})
    c = spectrum_key("xxz", {"J": 1.0, "h": 0.2, "L": 4})

    assert a == b
    assert a != c
    assert a != spectrum_key("bose_hubbard", {"L": 4, "h": 0.1, "J": 1.0})


def test_memory_cache_hit(settings):
    """Повторный запрос в том же процессе не диагонализует заново"""
    service = SpectrumService(settings)
    before = PrometheusMetrics.eigendecomposition_count("xxz")

    _, first = service.xxz_spectrum(XxzParams(L=4, h=0.1))
    _, second = service.xxz_spectrum(XxzParams(L=4, h=0.1))

    assert second is first
    assert service.eigendecompositions == 1
    assert service.cache_hits == {"memory": 1, "disk": 0}
    assert PrometheusMetrics.eigendecomposition_count("xxz") == before + 1


def test_disk_cache_survives_new_service(settings):
    """Новый сервис с тем же каталогом кэша читает спектр с диска"""
    _, computed = SpectrumService(settings).xxz_spectrum(XxzParams(L=6, h=0.4))

    fresh = SpectrumService(settings)
    _, loaded = fresh.xxz_spectrum(XxzParams(L=6, h=0.4))

    assert fresh.eigendecompositions == 0
    assert fresh.cache_hits["disk"] == 1
    assert np.array_equal(loaded.evals, computed.evals)
    assert np.array_equal(loaded.evecs, computed.evecs)
    assert loaded.label == computed.label


def test_disk_cache_registry(settings):
    """Запись реестра указывает на массивы в каталоге кэша"""
    service = SpectrumService(settings)
    service.xxz_spectrum(XxzParams(L=4, h=0.1))

    with service.session_factory() as session:
        records = spectrum_dal.list_cached_spectra(session, model="xxz")

    assert len(records) == 1
    assert records[0].dim == 16
    assert Path(records[0].evecs_path).parent == settings.cache_path / "arrays"


def test_lost_arrays_are_recomputed(settings):
    """Запись без файлов массивов удаляется, спектр считается заново"""
    SpectrumService(settings).xxz_spectrum(XxzParams(L=4, h=0.1))
    for path in (settings.cache_path / "arrays").glob("*.npy"):
        path.unlink()

    fresh = SpectrumService(settings)
    fresh.xxz_spectrum(XxzParams(L=4, h=0.1))

    assert fresh.eigendecompositions == 1
    assert fresh.cache_hits["disk"] == 0


def test_disabled_cache_keeps_memory_tier(no_cache_settings):
    """Без дискового кэша каждый процесс считает сам, но память работает"""
    first = SpectrumService(no_cache_settings)
    first.xxz_spectrum(XxzParams(L=4, h=0.1))
    first.xxz_spectrum(XxzParams(L=4, h=0.1))
    second = SpectrumService(no_cache_settings)
    second.xxz_spectrum(XxzParams(L=4, h=0.1))

    assert first.session_factory is None
    assert first.eigendecompositions == 1
    assert second.eigendecompositions == 1


def test_memory_cache_evicts_oldest(settings_env, monkeypatch):
    """LRU на CACHE_MEMORY_ENTRIES записей"""
    monkeypatch.setenv("CACHE_ENABLED", "false")
    monkeypatch.setenv("CACHE_MEMORY_ENTRIES", "1")
    service = SpectrumService(Settings())

    for h in (0.1, 0.2, 0.1):
        service.xxz_spectrum(XxzParams(L=4, h=h))

    assert service.eigendecompositions == 3


def test_bose_hubbard_spectrum(no_cache_settings):
    """Спектр Бозе-Хаббарда в секторе фиксированного N"""
    params = BoseHubbardParams(L=4, N=4, U=1.8, disorder_bound=0.05, seed=11)

    basis, spectrum = SpectrumService(no_cache_settings).bose_hubbard_spectrum(params)

    assert basis.dim == spectrum.dim == 35
    assert np.all(np.diff(spectrum.evals) >= 0)


@pytest.mark.parametrize("seed", [1, 2])
def test_bose_hubbard_key_depends_on_disorder(no_cache_settings, seed):
    """Разные зерна беспорядка дают разные спектры"""
    service = SpectrumService(no_cache_settings)

    _, a = service.bose_hubbard_spectrum(BoseHubbardParams(L=4, N=3, U=1.0, disorder_bound=0.5, seed=seed))
    _, b = service.bose_hubbard_spectrum(BoseHubbardParams(L=4, N=3, U=1.0, disorder_bound=0.5, seed=seed + 10))

    assert service.eigendecompositions == 2
    assert not np.allclose(a.evals, b.evals)


def test_key_locks_are_bounded(no_cache_settings):
    """Число блокировок не растет с числом ключей, ключ всегда получает одну и ту же"""
    service = SpectrumService(no_cache_settings)
    keys = [spectrum_key("xxz", {"L": 4, "h": 0.001 * i}) for i in range(1000)]

    locks = {id(service._lock_for(key)) for key in keys}

    assert len(locks) <= KEY_LOCK_STRIPES
    assert all(service._lock_for(key) is service._lock_for(key) for key in keys[:10])


def test_cache_logs_through_module_logger(no_cache_settings, caplog):
    """Попадания в кэш пишутся в логгер модуля сервиса"""
    service = SpectrumService(no_cache_settings)

    with caplog.at_level(logging.DEBUG, logger="ethlab.services.spectrum_service"):
        service.xxz_spectrum(XxzParams(L=4, h=0.1))
        service.xxz_spectrum(XxzParams(L=4, h=0.1))

    hits = [r for r in caplog.records if "served from memory cache" in r.getMessage()]
    assert [r.name for r in hits] == ["ethlab.services.spectrum_service"]
