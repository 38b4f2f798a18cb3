"""
Гамильтонианы и наблюдаемые в конфигурационном базисе.

Все операторы строятся как плотные вещественные симметричные матрицы:
каждый недиагональный элемент записывается сразу в обе позиции (a, b)
и (b, a), симметризация после построения не выполняется.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from ethlab.basis import BosonBasis, SpinBasis
from ethlab.errors import ArgumentError, ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymmetricOperator:
    """Плотная вещественная симметричная матрица с меткой происхождения."""

    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ArgumentError(f"Operator {self.label!r} must be square, got shape {self.matrix.shape}")
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class XxzParams:
    L: int
    J: float = 1.0
    Delta: float = math.pi / 4
    h: float = 0.0

    def __post_init__(self):
        if self.L % 2:
            raise ConfigurationError(f"XXZ chain needs even L, got L={self.L}")
        if not all(math.isfinite(v) for v in (self.J, self.Delta, self.h)):
            raise ConfigurationError(f"XXZ parameters must be finite: J={self.J}, Delta={self.Delta}, h={self.h}")

    @property
    def perturbed_site(self) -> int:
        return self.L // 2 - 1


@dataclass(frozen=True)
class BoseHubbardParams:
    """
    Параметры неупорядоченной цепочки Бозе-Хаббарда.

    Энергии узлов берутся из disorder, если он задан явно, иначе
    разыгрываются равномерно на (-disorder_bound, disorder_bound)
    генератором numpy с зерном seed.
    """

    L: int
    N: int
    U: float
    J: float = 1.0
    disorder_bound: float = 0.05
    seed: Optional[int] = None
    disorder: Optional[Tuple[float, ...]] = None

    def onsite_energies(self) -> np.ndarray:
        w = self.disorder_bound
        if self.disorder is not None:
            eps = np.asarray(self.disorder, dtype=float)
            if eps.shape != (self.L,):
                raise ArgumentError(f"Explicit disorder needs {self.L} values, got {eps.shape}")
            if w > 0 and np.any(np.abs(eps) >= w):
                raise ArgumentError(f"Explicit disorder values must lie strictly inside (-{w}, {w})")
            return eps
        if w <= 0:
            return np.zeros(self.L)
        rng = np.random.default_rng(self.seed)
        # uniform() дает [low, high), поэтому нижняя граница сдвинута внутрь интервала
        return rng.uniform(np.nextafter(-w, 0.0), w, self.L)


class BhObservable(str, Enum):
    TOTAL = "total_occupation"
    HALF_CHAIN = "half_chain_occupation"
    SITE = "site_occupation"


def _require_spin_basis(basis: SpinBasis, L: Optional[int] = None) -> None:
    if not isinstance(basis, SpinBasis):
        raise ArgumentError(f"Expected SpinBasis, got {type(basis).__name__}")
    if L is not None and basis.L != L:
        raise ArgumentError(f"Basis has L={basis.L}, parameters have L={L}")


def _add_flip_flop(matrix: np.ndarray, basis: SpinBasis, distance: int, amplitude: float) -> None:
    """
    Добавляет amplitude * (S+_i S-_{i+d} + S-_i S+_{i+d}) / 2 для всех пар
    узлов на расстоянии distance (открытые граничные условия).
    """
    idx = basis.indices
    for bit in range(basis.L - distance):
        up_a = (idx >> bit) & 1
        up_b = (idx >> (bit + distance)) & 1
        flippable = up_a != up_b
        source = idx[flippable]
        target = source ^ ((1 << bit) | (1 << (bit + distance)))
        matrix[source, target] += amplitude


def build_xxz(params: XxzParams, basis: SpinBasis) -> SymmetricOperator:
    """
    Гамильтониан XXZ с локальным возмущением h (S^z + S^x) на узле L/2 - 1.

    Args:
        params: Параметры цепочки
        basis: Полный спиновый базис той же длины

    Returns:
        SymmetricOperator размера 2^L

    Raises:
        ConfigurationError: Узел возмущения выходит за пределы цепочки
        ArgumentError: Базис не соответствует параметрам
    """
    _require_spin_basis(basis, params.L)
    idx = basis.indices
    H = np.zeros((basis.dim, basis.dim))
    diagonal = np.zeros(basis.dim)

    for bit in range(basis.L - 1):
        aligned = ((idx >> bit) & 1) == ((idx >> (bit + 1)) & 1)
        diagonal += params.J * params.Delta / 4 * np.where(aligned, 1.0, -1.0)
    _add_flip_flop(H, basis, distance=1, amplitude=params.J / 2)

    if params.h != 0.0:
        site = params.perturbed_site
        if site < 1:
            raise ConfigurationError(
                f"Perturbation site L/2 - 1 = {site} is not a valid site for L={params.L}"
            )
        bit = site - 1
        diagonal += params.h * np.where((idx >> bit) & 1, 0.5, -0.5)
        H[idx, idx ^ (1 << bit)] += params.h / 2

    H[idx, idx] += diagonal
    label = f"H_xxz L={params.L} J={params.J:g} Delta={params.Delta:.6g} h={params.h:g}"
    logger.debug(f"Built {label}: dim={basis.dim}")
    return SymmetricOperator(matrix=H, label=label)


def build_obs_T(basis: SpinBasis) -> SymmetricOperator:
    _require_spin_basis(basis)
    if basis.L < 2:
        raise ArgumentError(f"Observable T needs L >= 2, got L={basis.L}")
    T = np.zeros((basis.dim, basis.dim))
    _add_flip_flop(T, basis, distance=1, amplitude=1.0 / (2 * basis.L))
    return SymmetricOperator(matrix=T, label=f"T L={basis.L}")


def build_obs_O(basis: SpinBasis) -> SymmetricOperator:
    _require_spin_basis(basis)
    if basis.L < 3:
        raise ArgumentError(f"Observable O needs L >= 3, got L={basis.L}")
    O = np.zeros((basis.dim, basis.dim))
    _add_flip_flop(O, basis, distance=2, amplitude=1.0 / (2 * basis.L))
    return SymmetricOperator(matrix=O, label=f"O L={basis.L}")


XXZ_OBSERVABLES = {"T": build_obs_T, "O": build_obs_O}


def total_sz(basis: SpinBasis) -> np.ndarray:
    """Диагональ полного S^z в спиновом базисе."""
    idx = basis.indices
    ups = np.zeros(basis.dim, dtype=np.int64)
    for bit in range(basis.L):
        ups += (idx >> bit) & 1
    return ups - basis.L / 2


def magnetization_sectors(basis: SpinBasis) -> Dict[float, np.ndarray]:
    sz = total_sz(basis)
    return {float(value): np.flatnonzero(sz == value) for value in np.unique(sz)}


def build_bose_hubbard(params: BoseHubbardParams, basis: BosonBasis) -> SymmetricOperator:
    """
    Гамильтониан Бозе-Хаббарда: -J b+_i b_{i+1} + h.c., (U/2) n(n-1) и eps_i n_i.

    Args:
        params: Параметры модели
        basis: Сектор (L, N), совпадающий с params

    Returns:
        SymmetricOperator размера C(N + L - 1, L - 1)

    Raises:
        ArgumentError: Базис не соответствует параметрам
    """
    if not isinstance(basis, BosonBasis) or (basis.L, basis.N) != (params.L, params.N):
        raise ArgumentError(
            f"Basis sector does not match parameters (L={params.L}, N={params.N})"
        )
    states = basis.states
    eps = params.onsite_energies()
    H = np.zeros((basis.dim, basis.dim))

    diagonal = params.U / 2 * np.sum(states * (states - 1), axis=1) + states @ eps
    H[np.arange(basis.dim), np.arange(basis.dim)] = diagonal

    for site in range(params.L - 1):
        # b+_site b_{site+1}: обратный процесс дает тот же элемент в транспонированной позиции
        movable = np.flatnonzero(states[:, site + 1] > 0)
        targets = states[movable].copy()
        amplitude = -params.J * np.sqrt((targets[:, site] + 1) * targets[:, site + 1])
        targets[:, site] += 1
        targets[:, site + 1] -= 1
        target_idx = basis.indices_of(targets)
        H[target_idx, movable] = amplitude
        H[movable, target_idx] = amplitude

    label = f"H_bh L={params.L} N={params.N} J={params.J:g} U={params.U:g} seed={params.seed}"
    logger.debug(f"Built {label}: dim={basis.dim}, disorder={np.array2string(eps, precision=4)}")
    return SymmetricOperator(matrix=H, label=label)


def build_obs_bh(
    basis: BosonBasis,
    variant: BhObservable = BhObservable.HALF_CHAIN,
    site: Optional[int] = None,
) -> SymmetricOperator:
    """
    Диагональные наблюдаемые заполнения.

    Args:
        basis: Бозонный базис
        variant: total_occupation, half_chain_occupation или site_occupation
        site: Узел (с единицы) для site_occupation

    Returns:
        Диагональный SymmetricOperator

    Raises:
        ArgumentError: Неизвестный вариант или узел вне цепочки
    """
    try:
        variant = BhObservable(variant)
    except ValueError:
        raise ArgumentError(f"Unknown Bose-Hubbard observable {variant!r}") from None

    states = basis.states
    if variant is BhObservable.TOTAL:
        values = states.sum(axis=1)
        label = "N_total"
    elif variant is BhObservable.HALF_CHAIN:
        values = states[:, : basis.L // 2].sum(axis=1)
        label = f"N_left(1..{basis.L // 2})"
    else:
        if site is None or not 1 <= site <= basis.L:
            raise ArgumentError(f"site_occupation needs a site in 1..{basis.L}, got {site}")
        values = states[:, site - 1]
        label = f"n_{site}"

    return SymmetricOperator(matrix=np.diag(values.astype(float)), label=label)
