"""
Полная диагонализация плотных симметричных матриц и поворот
наблюдаемых в собственный базис энергии.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg

from ethlab.errors import ArgumentError, ComputationError
from ethlab.models import SymmetricOperator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Spectrum:
    """Собственные значения по возрастанию и ортонормированные собственные векторы (по столбцам)."""

    evals: np.ndarray
    evecs: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        self.evals.setflags(write=False)
        self.evecs.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.evals.shape[0])


@dataclass(frozen=True)
class EigenbasisObservable:
    matrix: np.ndarray = field(repr=False)
    evals: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.evals.shape[0])

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    def upper_triangle(self) -> np.ndarray:
        return self.matrix[np.triu_indices(self.dim, k=1)]


def fix_signs(evecs: np.ndarray) -> np.ndarray:
    """Делает положительной наибольшую по модулю компоненту каждого столбца."""
    pivots = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[pivots, np.arange(evecs.shape[1])])
    signs[signs == 0] = 1.0
    return evecs * signs


def eigh(A: Union[SymmetricOperator, np.ndarray], label: Optional[str] = None) -> Spectrum:
    """
    Полная диагонализация вещественной симметричной матрицы (LAPACK).

    Args:
        A: Оператор или квадратный массив
        label: Метка для сообщений об ошибках (по умолчанию метка оператора)

    Returns:
        Spectrum с фиксированным знаком собственных векторов

    Raises:
        ArgumentError: Пустая или не квадратная матрица
        ComputationError: Нет сходимости или нечисловые элементы
    """
    if isinstance(A, SymmetricOperator):
        matrix, label = A.matrix, label or A.label
    else:
        matrix = np.asarray(A, dtype=float)
    label = label or "matrix"

    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise ArgumentError(f"eigh needs a non-empty square matrix, got shape {matrix.shape} for {label!r}")

    try:
        evals, evecs = scipy.linalg.eigh(matrix, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ComputationError(f"Eigendecomposition failed: {e}", label=label) from e

    logger.debug(f"Diagonalized {label}: dim={matrix.shape[0]}, E in [{evals[0]:.6g}, {evals[-1]:.6g}]")
    return Spectrum(evals=evals, evecs=fix_signs(evecs), label=label)


def to_eigenbasis(Z: Union[SymmetricOperator, np.ndarray], S: Spectrum, label: Optional[str] = None) -> EigenbasisObservable:
    matrix = Z.matrix if isinstance(Z, SymmetricOperator) else np.asarray(Z, dtype=float)
    label = label or (Z.label if isinstance(Z, SymmetricOperator) else "Z")
    if matrix.shape != (S.dim, S.dim):
        raise ArgumentError(f"Observable {label!r} has shape {matrix.shape}, spectrum dim is {S.dim}")

    rotated = S.evecs.T @ (matrix @ S.evecs)
    rotated = 0.5 * (rotated + rotated.T)
    return EigenbasisObservable(matrix=rotated, evals=S.evals, label=label)
