"""
Энтропия запутанности чистых состояний при разбиении цепочки и
эталонная кривая Пейджа для случайных состояний.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from ethlab.basis import Bipartition
from ethlab.errors import ArgumentError
from ethlab.linalg.eigen import Spectrum

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-9
SINGULAR_VALUE_FLOOR = 1e-14


@dataclass(frozen=True)
class EntropyCurve:
    subsystem_sizes: np.ndarray
    mean_entropy: np.ndarray
    normalization: float
    states_averaged: int

    @property
    def L(self) -> int:
        return int(self.subsystem_sizes[-1])

    @property
    def normalized(self) -> np.ndarray:
        return self.mean_entropy / self.normalization

    def page(self) -> np.ndarray:
        return np.array([page_curve(int(a), self.L) for a in self.subsystem_sizes])


def _sites_of(psi: np.ndarray) -> int:
    L = int(np.log2(psi.size)) if psi.size > 0 else -1
    if L < 0 or (1 << L) != psi.size:
        raise ArgumentError(f"State length {psi.size} is not a power of two")
    return L


def eigenstate_entropy(psi: Sequence[complex], L_A: int) -> float:
    """
    Энтропия фон Неймана подсистемы из L_A узлов (в натах).

    Args:
        psi: Нормированный вектор длины 2^L (вещественный или комплексный)
        L_A: Размер подсистемы A, 0..L

    Returns:
        S_A = -sum lambda ln lambda по квадратам сингулярных чисел

    Raises:
        ArgumentError: Вектор не нормирован, длина не степень двойки или L_A вне диапазона
    """
    vector = np.asarray(psi)
    L = _sites_of(vector)
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ArgumentError(f"State is not normalized: |psi| = {norm!r}")
    if not 0 <= L_A <= L:
        raise ArgumentError(f"Subsystem size L_A={L_A} outside 0..{L}")

    singular = scipy.linalg.svdvals(Bipartition(L=L, L_A=L_A).reshape(vector))
    weights = singular[singular >= SINGULAR_VALUE_FLOOR] ** 2
    return float(-np.sum(weights * np.log(weights)))


def page_curve(L_A: int, L: int) -> float:
    """Средняя энтропия случайного состояния; выше половины цепочки L_A отражается в L - L_A."""
    if not 0 <= L_A <= L:
        raise ArgumentError(f"Subsystem size L_A={L_A} outside 0..{L}")
    n = min(L_A, L - L_A)
    return n * np.log(2) - 0.5 * 2.0 ** (2 * n - L)


def mean_entropy_curve(states: Sequence[Sequence[complex]], L: int, max_workers: int = 1) -> EntropyCurve:
    vectors = [np.asarray(s) for s in states]
    if not vectors:
        raise ArgumentError("Entropy curve needs at least one state")
    bad = [k for k, v in enumerate(vectors) if v.shape != (1 << L,)]
    if bad:
        raise ArgumentError(f"States {bad[:5]} do not have length 2^{L}")

    sizes = np.arange(L + 1)

    def profile(vector: np.ndarray) -> np.ndarray:
        return np.array([eigenstate_entropy(vector, int(a)) for a in sizes])

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_state = list(pool.map(profile, vectors))
    else:
        per_state = [profile(v) for v in vectors]

    return EntropyCurve(
        subsystem_sizes=sizes,
        mean_entropy=np.mean(np.stack(per_state), axis=0),
        normalization=L / 2 * np.log(2),
        states_averaged=len(vectors),
    )


def mid_spectrum_indices(dim: int, count: int) -> np.ndarray:
    if not 1 <= count <= dim:
        raise ArgumentError(f"Cannot select {count} mid-spectrum states out of {dim}")
    start = (dim - count) // 2
    return np.arange(start, start + count)


def spectrum_entropy_curve(spectrum: Spectrum, L: int, count: int = 100, max_workers: int = 1) -> EntropyCurve:
    """Средняя кривая энтропии по count собственным состояниям из середины спектра."""
    if spectrum.dim != 1 << L:
        raise ArgumentError(f"Spectrum dim {spectrum.dim} does not match L={L}")
    idx = mid_spectrum_indices(spectrum.dim, count)
    logger.debug(f"Entropy over states {idx[0]}..{idx[-1]} of {spectrum.label}")
    return mean_entropy_curve(spectrum.evecs[:, idx].T, L, max_workers=max_workers)
