"""
Сервис спектров: построение гамильтонианов, диагонализация и кэш.

Спектр идентифицируется ключом - SHA-256 канонического JSON описания
модели. Уровни кэша: словарь в памяти процесса (LRU на
CACHE_MEMORY_ENTRIES записей), затем массивы .npy на диске,
зарегистрированные в SQLite. Каждый ключ вычисляется не более одного
раза за процесс.
"""

import dataclasses
import hashlib
import json
import logging
import os
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from sqlalchemy.orm import sessionmaker

from config.settings import Settings
from db.dal import spectrum_dal
from db.database_setup import init_db, init_db_connection
from ethlab.basis import BosonBasis, SpinBasis, boson_basis, spin_basis
from ethlab.linalg.eigen import Spectrum, eigh
from ethlab.models import BoseHubbardParams, SymmetricOperator, XxzParams, build_bose_hubbard, build_xxz
from monitoring.metrics import PrometheusMetrics
from monitoring.performance import PerformanceProfiler

logger = logging.getLogger(__name__)

# число полос блокировок по ключу; ключи с одной полосой вычисляются по очереди
KEY_LOCK_STRIPES = 64


def spectrum_key(model: str, params: Dict[str, Any]) -> str:
    canonical = json.dumps({"model": model, "params": params}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _save_array(path: Path, array: np.ndarray) -> None:
    tmp_path = path.with_name(path.name + ".tmp")
    with tmp_path.open("wb") as f:
        np.save(f, array, allow_pickle=False)
    os.replace(tmp_path, path)


class SpectrumService:

    def __init__(self, settings: Settings, session_factory: Optional[sessionmaker] = None):
        self.settings = settings
        self.session_factory = session_factory
        if self.settings.CACHE_ENABLED and self.session_factory is None:
            self.session_factory = init_db_connection(settings)
            init_db()

        self.eigendecompositions = 0
        self.cache_hits: Dict[str, int] = {"memory": 0, "disk": 0}

        self._memory: "OrderedDict[str, Spectrum]" = OrderedDict()
        self._memory_lock = threading.Lock()
        self._key_locks = tuple(threading.Lock() for _ in range(KEY_LOCK_STRIPES))

    def _lock_for(self, key: str) -> threading.Lock:
        return self._key_locks[int(key[:8], 16) % len(self._key_locks)]

    def _remember(self, key: str, spectrum: Spectrum) -> None:
        capacity = self.settings.CACHE_MEMORY_ENTRIES
        if capacity <= 0:
            return
        with self._memory_lock:
            self._memory[key] = spectrum
            self._memory.move_to_end(key)
            while len(self._memory) > capacity:
                evicted, _ = self._memory.popitem(last=False)
                logger.debug(f"Spectrum {evicted[:12]} evicted from memory cache")

    def _recall(self, key: str) -> Optional[Spectrum]:
        with self._memory_lock:
            spectrum = self._memory.get(key)
            if spectrum is not None:
                self._memory.move_to_end(key)
            return spectrum

    def _load_from_disk(self, key: str) -> Optional[Spectrum]:
        if not self.session_factory:
            return None
        with self.session_factory() as session:
            record = spectrum_dal.get_cached_spectrum(session, key)
            if record is None:
                return None
            evals_path, evecs_path = Path(record.evals_path), Path(record.evecs_path)
            if not (evals_path.is_file() and evecs_path.is_file()):
                logger.warning(f"Cached spectrum {key[:12]} lost its arrays, dropping the record")
                spectrum_dal.delete_cached_spectrum(session, key)
                return None
            label = record.label
        try:
            evals = np.load(evals_path, allow_pickle=False)
            evecs = np.load(evecs_path, allow_pickle=False)
        except (OSError, ValueError) as e:
            logger.warning(f"Cannot load cached spectrum {key[:12]}: {e}")
            return None
        return Spectrum(evals=evals, evecs=evecs, label=label)

    def _store_on_disk(self, key: str, model: str, params: Dict[str, Any], spectrum: Spectrum) -> None:
        if not self.session_factory:
            return
        cache_dir = self.settings.cache_path / "arrays"
        cache_dir.mkdir(parents=True, exist_ok=True)
        evals_path = cache_dir / f"{key}.evals.npy"
        evecs_path = cache_dir / f"{key}.evecs.npy"
        try:
            _save_array(evals_path, spectrum.evals)
            _save_array(evecs_path, spectrum.evecs)
        except OSError as e:
            logger.warning(f"Cannot persist spectrum {key[:12]} to {cache_dir}: {e}")
            return
        with self.session_factory() as session:
            spectrum_dal.create_cached_spectrum(session, {
                "key": key,
                "model": model,
                "label": spectrum.label,
                "params_json": json.dumps(params, sort_keys=True),
                "dim": spectrum.dim,
                "evals_path": str(evals_path),
                "evecs_path": str(evecs_path),
            })

    def get_spectrum(self, model: str, params: Dict[str, Any], build: Callable[[], SymmetricOperator]) -> Spectrum:
        """
        Возвращает спектр модели из кэша или диагонализует ее.

        Args:
            model: Имя модели (xxz, bose_hubbard)
            params: Параметры, однозначно задающие матрицу
            build: Построитель гамильтониана, вызывается только при промахе кэша

        Returns:
            Spectrum (собственные векторы со знаковой фиксацией)

        Raises:
            ComputationError: Сбой диагонализации
        """
        key = spectrum_key(model, params)
        cached = self._recall(key)
        if cached is not None:
            self._count_hit("memory", key)
            return cached

        with self._lock_for(key):
            cached = self._recall(key)
            if cached is not None:
                self._count_hit("memory", key)
                return cached

            if self.settings.CACHE_ENABLED:
                cached = self._load_from_disk(key)
                if cached is not None:
                    self._count_hit("disk", key)
                    self._remember(key, cached)
                    return cached

            PrometheusMetrics.increment_cache_miss()
            operator = build()
            with PerformanceProfiler(f"eigh[{model}]") as profiler:
                spectrum = eigh(operator)
            self.eigendecompositions += 1
            PrometheusMetrics.increment_eigendecompositions(model)
            PrometheusMetrics.observe_eigh(model, spectrum.dim, profiler.duration)

            if self.settings.CACHE_ENABLED:
                self._store_on_disk(key, model, params, spectrum)
            self._remember(key, spectrum)
            return spectrum

    def _count_hit(self, tier: str, key: str) -> None:
        self.cache_hits[tier] += 1
        PrometheusMetrics.increment_cache_hit(tier)
        logger.debug(f"Spectrum {key[:12]} served from {tier} cache")

    def xxz_spectrum(self, params: XxzParams) -> Tuple[SpinBasis, Spectrum]:
        basis = spin_basis(params.L)
        spectrum = self.get_spectrum("xxz", dataclasses.asdict(params), lambda: build_xxz(params, basis))
        return basis, spectrum

    def bose_hubbard_spectrum(self, params: BoseHubbardParams) -> Tuple[BosonBasis, Spectrum]:
        basis = boson_basis(params.L, params.N)
        key_params = dataclasses.asdict(params)
        # явный беспорядок и зерно задают одну и ту же матрицу, в ключ идут сами энергии
        key_params["disorder"] = params.onsite_energies().tolist()
        spectrum = self.get_spectrum("bose_hubbard", key_params, lambda: build_bose_hubbard(params, basis))
        return basis, spectrum
