"""
Базисы многочастичного гильбертова пространства.

Спины 1/2: состояние кодируется целым числом, бит (i - 1) хранит спин
узла i (1 = вверх), узлы нумеруются с единицы. Строковое представление
выводится старшим битом вперед, т.е. узел L стоит первым символом.

Бозоны: векторы заполнения (n_1, ..., n_L) с фиксированным N,
упорядоченные лексикографически по убыванию.
"""

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Sequence, Tuple

import numpy as np

from ethlab.errors import ArgumentError, ConfigurationError

logger = logging.getLogger(__name__)

MAX_SPIN_SITES = 20
MAX_BOSON_DIM = 20_000


@dataclass(frozen=True)
class SpinBasis:
    """Полный базис цепочки из L спинов 1/2."""

    L: int

    @property
    def dim(self) -> int:
        return 1 << self.L

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.dim, dtype=np.int64)

    def to_bitstring(self, index: int) -> str:
        if not 0 <= index < self.dim:
            raise ArgumentError(f"State index {index} outside [0, {self.dim})")
        return format(index, f"0{self.L}b")

    def from_bitstring(self, bits: str) -> int:
        if len(bits) != self.L or set(bits) - {"0", "1"}:
            raise ArgumentError(f"Expected {self.L}-character 0/1 string, got {bits!r}")
        return int(bits, 2)

    def spin_up(self, site: int) -> np.ndarray:
        """
        Маска состояний, в которых спин на узле site направлен вверх.

        Args:
            site: Номер узла, начиная с 1

        Returns:
            Булев массив длины dim
        """
        if not 1 <= site <= self.L:
            raise ArgumentError(f"Site {site} outside 1..{self.L}")
        return ((self.indices >> (site - 1)) & 1).astype(bool)


@dataclass(frozen=True)
class BosonBasis:
    """Сектор с фиксированным числом бозонов N на L узлах."""

    L: int
    N: int
    states: np.ndarray = field(repr=False, compare=False)
    _binomials: np.ndarray = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return int(self.states.shape[0])

    def index_of(self, occupations: Sequence[int]) -> int:
        occ = np.asarray(occupations, dtype=np.int64)
        if occ.shape != (self.L,) or occ.min() < 0 or occ.sum() != self.N:
            raise ArgumentError(f"{tuple(occ.tolist())} is not a state of the (L={self.L}, N={self.N}) sector")
        return int(self.indices_of(occ[np.newaxis, :])[0])

    def indices_of(self, occupations: np.ndarray) -> np.ndarray:
        """
        Комбинаторный ранг векторов заполнения в порядке убывания.

        Для узла i число состояний, идущих раньше, равно числу способов
        разместить оставшиеся бозоны, если на узел i положить больше n_i.
        Эта сумма сворачивается в один биномиальный коэффициент.

        Args:
            occupations: Массив формы (m, L)

        Returns:
            Массив индексов длины m
        """
        occ = np.asarray(occupations, dtype=np.int64)
        remaining = np.full(occ.shape[0], self.N, dtype=np.int64)
        rank = np.zeros(occ.shape[0], dtype=np.int64)
        for site in range(self.L - 1):
            tail = self.L - site - 1
            surplus = remaining - occ[:, site] - 1
            valid = surplus >= 0
            rank[valid] += self._binomials[surplus[valid] + tail, tail]
            remaining -= occ[:, site]
        return rank


@dataclass(frozen=True)
class Bipartition:
    """
    Разбиение цепочки на подсистемы A (L_A узлов) и B (L - L_A узлов).

    Строка соответствует старшим L_A битам индекса, столбец - младшим,
    так что row * 2^{L_B} + col == index и разбиение вектора сводится
    к psi.reshape(2**L_A, 2**L_B).
    """

    L: int
    L_A: int

    @property
    def L_B(self) -> int:
        return self.L - self.L_A

    def rows(self) -> np.ndarray:
        return np.arange(1 << self.L, dtype=np.int64) >> self.L_B

    def cols(self) -> np.ndarray:
        return np.arange(1 << self.L, dtype=np.int64) & ((1 << self.L_B) - 1)

    def split(self, index: int) -> Tuple[int, int]:
        return index >> self.L_B, index & ((1 << self.L_B) - 1)

    def reshape(self, psi: np.ndarray) -> np.ndarray:
        vector = np.asarray(psi)
        if vector.shape != (1 << self.L,):
            raise ArgumentError(f"State vector of length {vector.shape} does not match L={self.L}")
        return vector.reshape(1 << self.L_A, 1 << self.L_B)


def spin_basis(L: int) -> SpinBasis:
    if not 1 <= L <= MAX_SPIN_SITES:
        raise ConfigurationError(
            f"Spin chain length L={L} outside supported range 1..{MAX_SPIN_SITES} "
            f"(dense diagonalization limit 2^{MAX_SPIN_SITES})"
        )
    return SpinBasis(L=L)


def _descending_occupations(sites: int, bosons: int) -> Iterator[Tuple[int, ...]]:
    if sites == 1:
        yield (bosons,)
        return
    for first in range(bosons, -1, -1):
        for rest in _descending_occupations(sites - 1, bosons - first):
            yield (first,) + rest


def boson_basis(L: int, N: int) -> BosonBasis:
    """
    Строит базис сектора с фиксированным числом бозонов.

    Args:
        L: Число узлов (>= 1)
        N: Полное число бозонов (>= 0)

    Returns:
        BosonBasis с dim = C(N + L - 1, L - 1)

    Raises:
        ConfigurationError: Размерность превышает MAX_BOSON_DIM
    """
    if L < 1 or N < 0:
        raise ConfigurationError(f"Boson sector needs L >= 1 and N >= 0, got L={L}, N={N}")
    dim = comb(N + L - 1, L - 1)
    if dim > MAX_BOSON_DIM:
        raise ConfigurationError(
            f"Boson sector dimension {dim} for L={L}, N={N} exceeds the limit {MAX_BOSON_DIM}"
        )

    states = np.array(list(_descending_occupations(L, N)), dtype=np.int64).reshape(dim, L)
    binomials = np.array(
        [[comb(n, k) for k in range(L + 1)] for n in range(N + L + 1)],
        dtype=np.int64,
    )
    states.setflags(write=False)
    binomials.setflags(write=False)
    logger.debug(f"Boson basis L={L}, N={N}: dim={dim}")
    return BosonBasis(L=L, N=N, states=states, _binomials=binomials)


def bipartition(basis: SpinBasis, L_A: int) -> Bipartition:
    if not 0 <= L_A <= basis.L:
        raise ArgumentError(f"Subsystem size L_A={L_A} outside 0..{basis.L}")
    return Bipartition(L=basis.L, L_A=L_A)
