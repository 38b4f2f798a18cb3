"""
Эталонные случайные ансамбли: матрицы GOE, пуассоновские спектры,
выборки расстояний Вигнера и Броди (обратная функция распределения)
и хааровские случайные состояния.
"""

from typing import Optional

import numpy as np

from ethlab.errors import ArgumentError
from ethlab.linalg.fitting import brody_scale


def _rng(rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng()


def sample_goe(dim: int, rng: Optional[np.random.Generator] = None, sigma: float = 1.0) -> np.ndarray:
    """
    Матрица GOE: (A + A^T) * sigma / 2 при стандартной нормальной A.

    Дисперсия диагонали sigma^2, вне диагонали sigma^2 / 2.
    """
    if dim < 1:
        raise ArgumentError(f"GOE dimension must be positive, got {dim}")
    a = _rng(rng).standard_normal((dim, dim))
    return (a + a.T) * sigma / 2


def goe_spectrum(dim: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    return np.linalg.eigvalsh(sample_goe(dim, rng))


def poisson_spectrum(n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Некоррелированные уровни с единичным средним расстоянием."""
    return np.cumsum(_rng(rng).exponential(1.0, n))


def wigner_spacings(n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    u = _rng(rng).random(n)
    return np.sqrt(-4 * np.log1p(-u) / np.pi)


def brody_spacings(n: int, gamma: float, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    if not 0.0 <= gamma <= 1.0:
        raise ArgumentError(f"Brody gamma must be in [0, 1], got {gamma}")
    u = _rng(rng).random(n)
    return (-np.log1p(-u) / brody_scale(gamma)) ** (1 / (gamma + 1))


def haar_state(dim: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    rng = _rng(rng)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def haar_states(count: int, dim: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    rng = _rng(rng)
    return np.stack([haar_state(dim, rng) for _ in range(count)])
