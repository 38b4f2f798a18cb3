"""
Диагностики гипотезы термализации собственных состояний (ETH)
для наблюдаемой в собственном базисе энергии.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ethlab.errors import ArgumentError, InsufficientDataError
from ethlab.linalg.eigen import EigenbasisObservable
from ethlab.linalg.fitting import DecayFit, MixtureFit, fit_exponential_decay, fit_gaussian_mixture
from ethlab.spectral import HistogramData, histogram

logger = logging.getLogger(__name__)

MIN_DIAGONAL_DIM = 100
DEFAULT_EBAR_WINDOW = (-0.5, 0.5)
DEFAULT_DECAY_ONSET = 16.0


@dataclass(frozen=True)
class DiagonalProfile:
    eps: np.ndarray
    values: np.ndarray
    micro_avg: np.ndarray
    delta_mic: np.ndarray
    window_halfwidth: float


@dataclass(frozen=True)
class OffDiagonalSample:
    values: np.ndarray
    omega: np.ndarray
    ebar: np.ndarray
    first_state: int
    state_count: int

    @property
    def source(self) -> str:
        return f"states {self.first_state}..{self.first_state + self.state_count - 1}"

    @property
    def stderr(self) -> float:
        return float(np.std(self.values, ddof=1) / np.sqrt(self.values.size))


@dataclass(frozen=True)
class VarianceProfile:
    omega: np.ndarray
    scaled_variance: np.ndarray
    counts: np.ndarray
    decay: Optional[DecayFit]
    warning: Optional[str] = None


@dataclass(frozen=True)
class GaussianityProfile:
    omega: np.ndarray
    ratio: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class PairMoments:
    """Суммы по парам a < b в частотных бинах шириной delta_omega."""

    edges: np.ndarray
    counts: np.ndarray
    sum_abs: np.ndarray
    sum_sq: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def normalized_energies(evals) -> np.ndarray:
    e = np.asarray(evals, dtype=float).ravel()
    if e.size < 2 or e.max() == e.min():
        raise ArgumentError("Normalized energies need at least two distinct eigenvalues")
    return (e - e.min()) / (e.max() - e.min())


def diagonal_profile(Z: EigenbasisObservable, delta_eps: float = 0.02) -> DiagonalProfile:
    """
    Микроканоническое среднее диагонали и отклонение от него.

    Для каждого состояния n берутся все a с |eps_a - eps_n| <= delta_eps;
    delta_mic(n) - среднее |Z_aa - micro_avg(n)| по тому же окну.

    Args:
        Z: Наблюдаемая в собственном базисе
        delta_eps: Полуширина окна по нормированной энергии

    Returns:
        DiagonalProfile, вычисленный в каждой точке eps_n

    Raises:
        InsufficientDataError: dim < 100
    """
    if Z.dim < MIN_DIAGONAL_DIM:
        raise InsufficientDataError(f"Diagonal profile needs dim >= {MIN_DIAGONAL_DIM}, got {Z.dim}")
    if delta_eps <= 0:
        raise ArgumentError(f"delta_eps must be positive, got {delta_eps}")

    eps = normalized_energies(Z.evals)
    values = Z.diagonal()
    lo = np.searchsorted(eps, eps - delta_eps, side="left")
    hi = np.searchsorted(eps, eps + delta_eps, side="right")
    cumulative = np.concatenate(([0.0], np.cumsum(values)))
    micro_avg = (cumulative[hi] - cumulative[lo]) / (hi - lo)

    delta_mic = np.empty_like(values)
    for n in range(values.size):
        delta_mic[n] = np.mean(np.abs(values[lo[n] : hi[n]] - micro_avg[n]))

    return DiagonalProfile(
        eps=eps,
        values=values,
        micro_avg=micro_avg,
        delta_mic=delta_mic,
        window_halfwidth=delta_eps,
    )


def offdiag_window(Z: EigenbasisObservable, pair_count: int = 200) -> OffDiagonalSample:
    if pair_count < 2 or pair_count > Z.dim / 4:
        raise ArgumentError(f"pair_count must be in 2..dim/4 = {Z.dim // 4}, got {pair_count}")
    start = Z.dim // 2 - pair_count // 2
    rows, cols = np.triu_indices(pair_count, k=1)
    block = Z.matrix[start : start + pair_count, start : start + pair_count]
    energies = Z.evals[start : start + pair_count]
    return OffDiagonalSample(
        values=block[rows, cols].copy(),
        omega=energies[cols] - energies[rows],
        ebar=0.5 * (energies[rows] + energies[cols]),
        first_state=int(start),
        state_count=pair_count,
    )


def offdiag_histogram(sample: OffDiagonalSample, bins: int = 101, span: float = 5.0) -> HistogramData:
    """Симметричная гистограмма на +-span стандартных отклонений выборки."""
    width = span * float(np.std(sample.values))
    if width == 0:
        raise InsufficientDataError("Off-diagonal sample has zero spread")
    return histogram(sample.values, bins, (-width, width))


def offdiag_fits(sample: OffDiagonalSample) -> Tuple[MixtureFit, MixtureFit]:
    return fit_gaussian_mixture(sample.values, k=1), fit_gaussian_mixture(sample.values, k=2)


def binned_pair_moments(
    Z: EigenbasisObservable,
    ebar_window: Tuple[float, float] = DEFAULT_EBAR_WINDOW,
    delta_omega: float = 0.05,
) -> PairMoments:
    """
    Счетчики, суммы |Z_ab| и |Z_ab|^2 по частотным бинам для пар a < b
    со средней энергией в ebar_window.

    Собственные значения отсортированы, поэтому для фиксированной строки a
    допустимые b образуют непрерывный диапазон, найденный бинарным поиском.
    """
    lo, hi = ebar_window
    if not lo < hi:
        raise ArgumentError(f"ebar_window must satisfy lo < hi, got {ebar_window}")
    if delta_omega <= 0:
        raise ArgumentError(f"delta_omega must be positive, got {delta_omega}")

    E = Z.evals
    nbins = int(np.ceil((E[-1] - E[0]) / delta_omega)) + 1
    counts = np.zeros(nbins)
    sum_abs = np.zeros(nbins)
    sum_sq = np.zeros(nbins)

    first = np.searchsorted(E, 2 * lo - E, side="left")
    last = np.searchsorted(E, 2 * hi - E, side="right")
    for a in range(E.size):
        b0 = max(first[a], a + 1)
        b1 = last[a]
        if b1 <= b0:
            continue
        magnitude = np.abs(Z.matrix[a, b0:b1])
        bins = np.minimum(((E[b0:b1] - E[a]) / delta_omega).astype(np.int64), nbins - 1)
        counts += np.bincount(bins, minlength=nbins)
        sum_abs += np.bincount(bins, weights=magnitude, minlength=nbins)
        sum_sq += np.bincount(bins, weights=magnitude * magnitude, minlength=nbins)

    if counts.sum() == 0:
        raise InsufficientDataError(f"No eigenstate pairs with mean energy in [{lo:g}, {hi:g}]")
    edges = np.arange(nbins + 1) * delta_omega
    return PairMoments(edges=edges, counts=counts, sum_abs=sum_abs, sum_sq=sum_sq)


def _default_decay_fit(omega: np.ndarray, values: np.ndarray) -> Tuple[Optional[DecayFit], Optional[str]]:
    omega_max = float(omega.max())
    for window in ((DEFAULT_DECAY_ONSET, 0.9 * omega_max), (0.6 * omega_max, 0.9 * omega_max)):
        if window[0] >= window[1]:
            continue
        try:
            return fit_exponential_decay(omega, values, window), None
        except InsufficientDataError:
            logger.info(f"Decay fit window [{window[0]:.3g}, {window[1]:.3g}] has too few bins, trying fallback")
    warning = f"no decay fit window with enough bins below omega_max={omega_max:.4g}"
    logger.warning(f"Variance profile: {warning}")
    return None, warning


def variance_profile(
    Z: EigenbasisObservable,
    L: int,
    ebar_window: Tuple[float, float] = DEFAULT_EBAR_WINDOW,
    delta_omega: float = 0.05,
    fit_window: Optional[Tuple[float, float]] = None,
    min_count: int = 10,
) -> VarianceProfile:
    """
    Масштабированная дисперсия L * D * mean|Z_ab|^2 по частотным бинам и
    подгонка экспоненциального спада.

    Args:
        Z: Наблюдаемая в собственном базисе (сырые собственные значения)
        L: Число узлов
        ebar_window: Окно средней энергии
        delta_omega: Ширина частотного бина
        fit_window: Окно подгонки; по умолчанию [16, 0.9 omega_max]
            с запасным окном [0.6 omega_max, 0.9 omega_max]
        min_count: Минимум пар в бине

    Returns:
        VarianceProfile; decay равен None, если ни одно окно не подходит

    Raises:
        InsufficientDataError: Нет пар в окне средней энергии
    """
    moments = binned_pair_moments(Z, ebar_window, delta_omega)
    keep = (moments.counts >= min_count) & (moments.sum_sq > 0)
    if not keep.any():
        raise InsufficientDataError(f"No frequency bin holds >= {min_count} pairs with non-zero elements")

    omega = moments.centers[keep]
    counts = moments.counts[keep]
    scaled = L * Z.dim * moments.sum_sq[keep] / counts

    if fit_window is not None:
        decay, warning = fit_exponential_decay(omega, scaled, fit_window), None
    else:
        decay, warning = _default_decay_fit(omega, scaled)

    if decay is not None:
        logger.info(
            f"Variance decay for {Z.label}: eta={decay.eta:.4f} +- {decay.eta_stderr:.4f} "
            f"on [{decay.fit_window[0]:.3g}, {decay.fit_window[1]:.3g}]"
        )
    return VarianceProfile(
        omega=omega,
        scaled_variance=scaled,
        counts=counts.astype(np.int64),
        decay=decay,
        warning=warning,
    )


def gaussianity_ratio(
    Z: EigenbasisObservable,
    ebar_window: Tuple[float, float] = DEFAULT_EBAR_WINDOW,
    delta_omega: float = 0.1,
    min_count: int = 10,
) -> GaussianityProfile:
    """R(omega) = mean|Z|^2 / (mean|Z|)^2; для гауссовых элементов R -> pi/2."""
    moments = binned_pair_moments(Z, ebar_window, delta_omega)
    keep = (moments.counts >= min_count) & (moments.sum_abs > 0)
    counts = moments.counts[keep]
    ratio = (moments.sum_sq[keep] / counts) / (moments.sum_abs[keep] / counts) ** 2
    return GaussianityProfile(omega=moments.centers[keep], ratio=ratio, counts=counts.astype(np.int64))
