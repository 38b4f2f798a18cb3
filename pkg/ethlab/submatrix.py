"""
Ансамбли диагональных блоков наблюдаемой в собственном базисе.

Блок с началом a0 - главная подматрица Z[a0:a0+M, a0:a0+M]. Для каждого
блока считаются отношение дисперсий диагонали и вне диагонали,
статистика уровней его собственных значений, SFF и энтропия запутанности
собственных состояний блока как гамильтониана фиктивных спинов.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from ethlab.entanglement import EntropyCurve, mean_entropy_curve, mid_spectrum_indices
from ethlab.errors import ArgumentError, ComputationError, InsufficientDataError, UnfoldingError
from ethlab.linalg.eigen import EigenbasisObservable, eigh
from ethlab.spectral import HistogramData, SffCurve, histogram, ratios_from_spacings, sff, unfold

logger = logging.getLogger(__name__)

DEFAULT_TRIM_FRAC = 0.03
BATCHED_EIGVALS_MAX = 64
MIN_NNSD_BLOCK = 256
MIN_SFF_BLOCK = 128
OFFDIAG_VARIANCE_FLOOR = 1e-30


@dataclass(frozen=True)
class BlockEnsemble:
    blocks: np.ndarray = field(repr=False)
    M: int
    alpha0s: np.ndarray
    trim: int
    label: str
    source_dim: int
    overlapping: bool = False

    @property
    def count(self) -> int:
        return int(self.blocks.shape[0])

    def central_index(self) -> int:
        target = (self.source_dim - self.M) // 2
        return int(np.argmin(np.abs(self.alpha0s - target)))


@dataclass(frozen=True)
class VarianceRatioSeries:
    ratios: np.ndarray
    alpha0s: np.ndarray

    @property
    def block_index(self) -> np.ndarray:
        return np.arange(self.ratios.size)

    @property
    def missing(self) -> int:
        return int(np.isnan(self.ratios).sum())

    @property
    def mean(self) -> float:
        defined = self.ratios[~np.isnan(self.ratios)]
        return float(defined.mean()) if defined.size else float("nan")


def default_trim(dim: int, trim_frac: float = DEFAULT_TRIM_FRAC) -> int:
    return int(round(trim_frac * dim))


def max_block_count(dim: int, M: int, trim: int) -> int:
    """Наибольшее число различных начал блоков в области [trim, dim - trim)."""
    return max(dim - 2 * trim - M + 1, 0)


def block_starts(dim: int, M: int, count: int, trim: int) -> np.ndarray:
    if M < 1 or count < 1 or trim < 0:
        raise ArgumentError(f"Block size, count and trim must be positive (M={M}, count={count}, trim={trim})")
    feasible = max_block_count(dim, M, trim)
    if feasible == 0:
        raise ArgumentError(f"Block size {M} does not fit into dim {dim} with trim {trim}; maximum count is 0")
    if count == 1:
        return np.array([(dim - M) // 2])
    stride = (dim - 2 * trim - M) // (count - 1)
    if stride < 1:
        raise ArgumentError(
            f"{count} blocks of size {M} do not fit into dim {dim} with trim {trim}; maximum count is {feasible}"
        )
    return trim + stride * np.arange(count)


def extract_blocks(
    Z: EigenbasisObservable,
    M: int,
    count: int,
    trim: Optional[int] = None,
) -> BlockEnsemble:
    """
    Вырезает count диагональных блоков M x M с равномерным шагом.

    Args:
        Z: Наблюдаемая в собственном базисе
        M: Размер блока
        count: Число блоков
        trim: Число состояний, исключаемых у каждого края (по умолчанию 3% dim)

    Returns:
        BlockEnsemble; перекрытие блоков допустимо и отмечается флагом

    Raises:
        ArgumentError: Невыполнимая комбинация (count, M, trim)
    """
    trim = default_trim(Z.dim) if trim is None else trim
    starts = block_starts(Z.dim, M, count, trim)
    blocks = np.stack([Z.matrix[a0 : a0 + M, a0 : a0 + M] for a0 in starts])
    overlapping = bool(count > 1 and starts[1] - starts[0] < M)
    if overlapping:
        logger.info(f"{count} blocks of size {M} from {Z.label} overlap (stride {starts[1] - starts[0]})")
    return BlockEnsemble(
        blocks=blocks,
        M=M,
        alpha0s=starts,
        trim=trim,
        label=Z.label,
        source_dim=Z.dim,
        overlapping=overlapping,
    )


def tile_blocks(Z: EigenbasisObservable, M: int) -> BlockEnsemble:
    """Неперекрывающиеся блоки, покрывающие спектр от центра (dim // M штук)."""
    if M > Z.dim:
        raise ArgumentError(f"Block size {M} exceeds dim {Z.dim}")
    count = Z.dim // M
    if count == 1:
        return extract_blocks(Z, M, 1, trim=0)
    return extract_blocks(Z, M, count, trim=(Z.dim - count * M) // 2)


def variance_ratio(block: np.ndarray) -> float:
    matrix = np.asarray(block, dtype=float)
    M = matrix.shape[0]
    if matrix.shape != (M, M) or M < 3:
        raise ArgumentError(f"Variance ratio needs a square block with M >= 3, got shape {matrix.shape}")
    off = matrix[np.triu_indices(M, k=1)]
    off_var = np.var(off, ddof=1)
    if off_var < OFFDIAG_VARIANCE_FLOOR:
        return float("nan")
    return float(np.var(np.diag(matrix), ddof=1) / off_var)


def ensemble_variance_ratios(ens: BlockEnsemble) -> VarianceRatioSeries:
    ratios = np.array([variance_ratio(block) for block in ens.blocks])
    return VarianceRatioSeries(ratios=ratios, alpha0s=ens.alpha0s)


def block_eigenvalues(ens: BlockEnsemble, max_workers: int = 1) -> np.ndarray:
    """
    Собственные значения всех блоков, порядок строк совпадает с порядком блоков.

    Raises:
        ComputationError: Диагонализация блока не сошлась или блок содержит inf/NaN
    """
    try:
        if ens.M <= BATCHED_EIGVALS_MAX:
            return np.linalg.eigvalsh(ens.blocks)
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                return np.stack(list(pool.map(scipy.linalg.eigvalsh, ens.blocks)))
        return np.stack([scipy.linalg.eigvalsh(block) for block in ens.blocks])
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ComputationError(f"Block eigenvalues failed: {e}", label=ens.label) from e


def default_edge_drop(M: int) -> int:
    return max(1, int(round(0.02 * M)))


def ensemble_spacing_ratios(
    ens: BlockEnsemble,
    edge_drop: Optional[int] = None,
    max_workers: int = 1,
) -> np.ndarray:
    """
    Отношения соседних расстояний собственных значений всех блоков,
    объединенные в порядке блоков, без edge_drop крайних уровней блока.

    Raises:
        ArgumentError: M - 2 * edge_drop < 4
    """
    edge_drop = default_edge_drop(ens.M) if edge_drop is None else edge_drop
    if edge_drop < 0 or ens.M - 2 * edge_drop < 4:
        raise ArgumentError(f"edge_drop={edge_drop} leaves fewer than 4 levels in blocks of size {ens.M}")

    evals = block_eigenvalues(ens, max_workers)[:, edge_drop : ens.M - edge_drop]
    spacings = np.diff(evals, axis=1)
    degenerate = int(np.any(spacings == 0, axis=1).sum())
    if degenerate:
        logger.warning(f"{degenerate} of {ens.count} blocks of {ens.label} have degenerate eigenvalues (r = 0)")
    return ratios_from_spacings(spacings).ravel()


def pooled_unfolded_blocks(
    ens: BlockEnsemble,
    poly_degree: int = 12,
    trim_frac: float = 0.05,
    max_workers: int = 1,
) -> Tuple[List[np.ndarray], int]:
    """
    Развернутые спектры блоков; блоки с неудачной разверткой пропускаются.

    Returns:
        (список развернутых уровней по блокам, число пропущенных блоков)
    """
    unfolded = []
    skipped = 0
    for index, levels in enumerate(block_eigenvalues(ens, max_workers)):
        try:
            unfolded.append(unfold(levels, poly_degree, trim_frac).values)
        except UnfoldingError as e:
            skipped += 1
            logger.warning(f"Block {index} of {ens.label} skipped: {e}")
    if not unfolded:
        raise InsufficientDataError(f"All {ens.count} blocks of {ens.label} failed to unfold")
    return unfolded, skipped


def ensemble_nnsd(
    ens: BlockEnsemble,
    poly_degree: int = 12,
    trim_frac: float = 0.05,
    bins: int = 50,
    s_max: float = 4.0,
    max_workers: int = 1,
) -> HistogramData:
    if ens.M < MIN_NNSD_BLOCK:
        raise ArgumentError(f"Block NNSD needs M >= {MIN_NNSD_BLOCK}, got {ens.M}")
    unfolded, _ = pooled_unfolded_blocks(ens, poly_degree, trim_frac, max_workers)
    spacings = np.concatenate([np.diff(levels) for levels in unfolded])
    return histogram(spacings, bins, (0.0, s_max))


def ensemble_sff(
    ens: BlockEnsemble,
    t_grid: np.ndarray,
    poly_degree: int = 12,
    trim_frac: float = 0.05,
    max_workers: int = 1,
) -> SffCurve:
    if ens.M < MIN_SFF_BLOCK:
        raise ArgumentError(f"Block SFF needs M >= {MIN_SFF_BLOCK}, got {ens.M}")
    unfolded, _ = pooled_unfolded_blocks(ens, poly_degree, trim_frac, max_workers)
    return sff(unfolded, t_grid)


def block_magnitude_dump(ens: BlockEnsemble, block_index: int) -> np.ndarray:
    if not 0 <= block_index < ens.count:
        raise ArgumentError(f"Block index {block_index} outside 0..{ens.count - 1}")
    return np.abs(ens.blocks[block_index])


def block_as_hamiltonian(
    ens: BlockEnsemble,
    state_count: int = 20,
    block_index: Optional[int] = None,
    max_workers: int = 1,
) -> EntropyCurve:
    """
    Центральный блок M = 2^k как гамильтониан k фиктивных спинов 1/2:
    средняя энтропия запутанности state_count состояний из середины его спектра,
    нормировка (k/2) ln 2.

    Raises:
        ArgumentError: M не степень двойки
    """
    M = ens.M
    if M < 2 or M & (M - 1):
        raise ArgumentError(f"Block size {M} is not a power of two")
    k = M.bit_length() - 1
    index = ens.central_index() if block_index is None else block_index
    if not 0 <= index < ens.count:
        raise ArgumentError(f"Block index {index} outside 0..{ens.count - 1}")

    spectrum = eigh(ens.blocks[index], label=f"{ens.label} block@{ens.alpha0s[index]}")
    states = spectrum.evecs[:, mid_spectrum_indices(M, state_count)].T
    return mean_entropy_curve(states, k, max_workers=max_workers)
