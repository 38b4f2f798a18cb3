"""
Статистика спектральных флуктуаций.

Развертка спектра полиномиальной подгонкой ступенчатой функции,
распределение расстояний между соседними уровнями (NNSD) и подгонка
Броди, числовая дисперсия уровней, отношения соседних расстояний,
спектральный форм-фактор и аналитические эталоны Пуассона и GOE.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.ndimage import uniform_filter1d

from ethlab.errors import ArgumentError, InsufficientDataError, UnfoldingError
from ethlab.linalg.fitting import BrodyFit, brody_scale, fit_brody

logger = logging.getLogger(__name__)

MIN_UNFOLD_LEVELS = 50
MIN_NNSD_LEVELS = 100
SFF_TIME_CHUNK = 64

REFERENCE_KINDS = (
    "nnsd_poisson",
    "nnsd_wigner",
    "nnsd_brody",
    "pr_poisson",
    "pr_goe",
    "nv_poisson",
    "nv_goe",
    "sff_goe",
)


@dataclass(frozen=True)
class UnfoldedSpectrum:
    values: np.ndarray
    trim_frac: float
    poly_degree: int

    def spacings(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def span(self) -> float:
        return float(self.values[-1] - self.values[0])


@dataclass(frozen=True)
class HistogramData:
    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)


@dataclass(frozen=True)
class NumberVarianceCurve:
    l: np.ndarray
    sigma2: np.ndarray

    def as_pairs(self) -> List[Tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.l, self.sigma2)]


@dataclass(frozen=True)
class SffCurve:
    times: np.ndarray
    values: np.ndarray
    window_size: int
    window_count: int
    spread: Optional[np.ndarray] = field(default=None, repr=False)


def histogram(values: np.ndarray, bins: int, value_range: Tuple[float, float]) -> HistogramData:
    """Нормированная гистограмма: сумма density * width == 1 по попавшим в диапазон значениям."""
    data = np.asarray(values, dtype=float).ravel()
    in_range = (data >= value_range[0]) & (data <= value_range[1])
    if not in_range.any():
        raise InsufficientDataError(f"No samples inside histogram range {value_range}")
    densities, edges = np.histogram(data, bins=bins, range=value_range, density=True)
    return HistogramData(bin_edges=edges, densities=densities, sample_count=int(data.size))


def unfold(evals: Sequence[float], poly_degree: int = 12, trim_frac: float = 0.05) -> UnfoldedSpectrum:
    """
    Развертка спектра: значения сглаженной ступенчатой функции N(E).

    Args:
        evals: Собственные значения по возрастанию
        poly_degree: Степень полинома, 3..20
        trim_frac: Доля уровней, отбрасываемая с каждого края, [0, 0.3)

    Returns:
        UnfoldedSpectrum со средним расстоянием около единицы

    Raises:
        InsufficientDataError: Меньше 50 уровней
        ArgumentError: Параметры вне допустимых диапазонов
        UnfoldingError: Подогнанная N(E) немонотонна в сохраненном окне
    """
    e = np.asarray(evals, dtype=float).ravel()
    if e.size < MIN_UNFOLD_LEVELS:
        raise InsufficientDataError(f"Unfolding needs >= {MIN_UNFOLD_LEVELS} levels, got {e.size}")
    if not 3 <= poly_degree <= 20:
        raise ArgumentError(f"poly_degree must be in 3..20, got {poly_degree}")
    if not 0.0 <= trim_frac < 0.3:
        raise ArgumentError(f"trim_frac must be in [0, 0.3), got {trim_frac}")
    if np.any(np.diff(e) < 0):
        raise ArgumentError("Eigenvalues must be sorted ascending before unfolding")

    staircase = np.arange(1, e.size + 1, dtype=float)
    smooth = Polynomial.fit(e, staircase, deg=poly_degree)(e)

    cut = int(np.floor(trim_frac * e.size))
    retained = smooth[cut : e.size - cut]
    if np.any(np.diff(retained) < -1e-12):
        raise UnfoldingError(
            f"Fitted staircase of degree {poly_degree} is not monotone inside the retained window",
            label="unfold",
        )

    mean_spacing = (retained[-1] - retained[0]) / max(retained.size - 1, 1)
    if not 0.95 <= mean_spacing <= 1.05:
        logger.warning(f"Unfolded mean spacing {mean_spacing:.4f} deviates from 1 (degree {poly_degree})")
    return UnfoldedSpectrum(values=retained, trim_frac=trim_frac, poly_degree=poly_degree)


def nnsd(u: UnfoldedSpectrum, bins: int = 50, s_max: float = 4.0) -> HistogramData:
    if u.values.size < MIN_NNSD_LEVELS:
        raise InsufficientDataError(f"NNSD needs >= {MIN_NNSD_LEVELS} retained levels, got {u.values.size}")
    return histogram(u.spacings(), bins, (0.0, s_max))


def brody_fit(spacings: Sequence[float]) -> BrodyFit:
    s = np.asarray(spacings, dtype=float).ravel()
    mean = float(np.mean(s)) if s.size else float("nan")
    if s.size and not 0.9 <= mean <= 1.1:
        logger.warning(f"Brody fit on spacings with mean {mean:.4f}; expected unfolded spacings")
    return fit_brody(s)


def number_variance(u: UnfoldedSpectrum, l_grid: Sequence[float]) -> NumberVarianceCurve:
    """
    Дисперсия числа уровней в окнах длины l, сдвигаемых с шагом l/4.

    Raises:
        ArgumentError: Пустая сетка, l <= 0 или max(l) > span/10
    """
    grid = np.asarray(l_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ArgumentError("Number variance needs a non-empty l grid")
    if np.any(grid <= 0):
        raise ArgumentError("Window lengths must be positive")
    values = u.values
    first, last = float(values[0]), float(values[-1])
    if grid.max() > (last - first) / 10:
        raise ArgumentError(
            f"Largest window l={grid.max():g} exceeds span/10 = {(last - first) / 10:.4g} of the unfolded spectrum"
        )

    sigma2 = np.empty_like(grid)
    for k, l in enumerate(grid):
        starts = np.arange(first, last - l, l / 4)
        counts = np.searchsorted(values, starts + l, side="left") - np.searchsorted(values, starts, side="left")
        sigma2[k] = np.var(counts)
    return NumberVarianceCurve(l=grid, sigma2=sigma2)


def ratios_from_spacings(spacings: np.ndarray) -> np.ndarray:
    """r = min(s_i, s_{i+1}) / max(s_i, s_{i+1}) вдоль последней оси; 0/0 дает 0."""
    a, b = spacings[..., :-1], spacings[..., 1:]
    upper = np.maximum(a, b)
    return np.divide(np.minimum(a, b), upper, out=np.zeros_like(upper), where=upper > 0)


def spacing_ratios(evals: Sequence[float]) -> np.ndarray:
    e = np.asarray(evals, dtype=float).ravel()
    if e.size < 3:
        raise ArgumentError(f"Spacing ratios need >= 3 levels, got {e.size}")
    s = np.diff(e)
    if np.any(s < 0):
        raise ArgumentError("Eigenvalues must be sorted ascending")
    return ratios_from_spacings(s)


def nnsd_poisson(s: np.ndarray) -> np.ndarray:
    return np.exp(-s)


def nnsd_wigner(s: np.ndarray) -> np.ndarray:
    return np.pi * s / 2 * np.exp(-np.pi * s**2 / 4)


def nnsd_brody(s: np.ndarray, gamma: float) -> np.ndarray:
    b = brody_scale(gamma)
    return (gamma + 1) * b * s**gamma * np.exp(-b * s ** (gamma + 1))


def pr_poisson(r: np.ndarray) -> np.ndarray:
    return 2 / (1 + r) ** 2


def pr_goe(r: np.ndarray) -> np.ndarray:
    return 27 / 4 * (r + r**2) / (1 + r + r**2) ** 2.5


def nv_poisson(l: np.ndarray) -> np.ndarray:
    return np.asarray(l, dtype=float).copy()


def nv_goe(l: np.ndarray) -> np.ndarray:
    return 2 / np.pi**2 * (np.log(2 * np.pi * l) + np.euler_gamma + 1 - np.pi**2 / 8)


def sff_goe(t: np.ndarray) -> np.ndarray:
    """Форм-фактор GOE в развернутых единицах, tau = t / 2pi, плато 1."""
    tau = np.asarray(t, dtype=float) / (2 * np.pi)
    out = np.empty_like(tau)
    early = tau <= 1
    out[early] = 2 * tau[early] - tau[early] * np.log1p(2 * tau[early])
    late = tau[~early]
    out[~early] = 2 - late * np.log((2 * late + 1) / (2 * late - 1))
    return out


def reference_curves(kind: str, grid: Sequence[float], gamma: Optional[float] = None) -> np.ndarray:
    """
    Аналитические эталонные кривые.

    Args:
        kind: Одно из REFERENCE_KINDS
        grid: Точки вычисления
        gamma: Параметр Броди для nnsd_brody

    Returns:
        Массив формы (n, 2) пар (x, y)

    Raises:
        ArgumentError: Неизвестная кривая или точки вне области определения
    """
    x = np.asarray(grid, dtype=float).ravel()
    if kind not in REFERENCE_KINDS:
        raise ArgumentError(f"Unknown reference curve {kind!r}; expected one of {', '.join(REFERENCE_KINDS)}")
    if kind.startswith(("nnsd", "pr", "sff")) and np.any(x < 0):
        raise ArgumentError(f"Reference curve {kind} is defined for non-negative arguments only")
    if kind.startswith("nv") and np.any(x <= 0):
        raise ArgumentError(f"Reference curve {kind} is defined for positive window lengths only")

    if kind == "nnsd_poisson":
        y = nnsd_poisson(x)
    elif kind == "nnsd_wigner":
        y = nnsd_wigner(x)
    elif kind == "nnsd_brody":
        if gamma is None or not 0.0 <= gamma <= 1.0:
            raise ArgumentError(f"nnsd_brody needs gamma in [0, 1], got {gamma}")
        y = nnsd_brody(x, gamma)
    elif kind == "pr_poisson":
        y = pr_poisson(x)
    elif kind == "pr_goe":
        y = pr_goe(x)
    elif kind == "nv_poisson":
        y = nv_poisson(x)
    elif kind == "nv_goe":
        y = nv_goe(x)
    else:
        y = sff_goe(x)
    return np.column_stack((x, y))


def sff_time_grid(t_min: float = 1e-2, t_max: float = 1e3, points: int = 400) -> np.ndarray:
    if not 0 < t_min < t_max or points < 2:
        raise ArgumentError(f"Invalid SFF time grid: t_min={t_min}, t_max={t_max}, points={points}")
    return np.logspace(np.log10(t_min), np.log10(t_max), points)


def _single_window_sff(levels: np.ndarray, times: np.ndarray) -> np.ndarray:
    out = np.empty(times.size)
    for start in range(0, times.size, SFF_TIME_CHUNK):
        chunk = times[start : start + SFF_TIME_CHUNK]
        amplitude = np.exp(1j * np.outer(chunk, levels)).sum(axis=1)
        out[start : start + chunk.size] = np.abs(amplitude) ** 2 / levels.size
    return out


def sff(eval_windows: Sequence[Sequence[float]], t_grid: Sequence[float]) -> SffCurve:
    """
    Спектральный форм-фактор |sum_m exp(i E_m t)|^2 / N, усредненный по окнам.

    Args:
        eval_windows: Окна уровней одинакового размера (развернутые)
        t_grid: Положительные моменты времени по возрастанию

    Returns:
        SffCurve со средним и разбросом (std) по окнам

    Raises:
        ArgumentError: Нет окон, окна разного размера или некорректная сетка
    """
    windows = [np.asarray(w, dtype=float).ravel() for w in eval_windows]
    if not windows:
        raise ArgumentError("SFF needs at least one eigenvalue window")
    sizes = {w.size for w in windows}
    if len(sizes) != 1 or 0 in sizes:
        raise ArgumentError(f"SFF windows must be non-empty and equally sized, got sizes {sorted(sizes)}")
    times = np.asarray(t_grid, dtype=float).ravel()
    if times.size == 0 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ArgumentError("SFF time grid must be positive and strictly increasing")

    per_window = np.stack([_single_window_sff(w, times) for w in windows])
    return SffCurve(
        times=times,
        values=per_window.mean(axis=0),
        window_size=windows[0].size,
        window_count=len(windows),
        spread=per_window.std(axis=0),
    )


def sff_single_realization(
    evals: Sequence[float],
    t_grid: Sequence[float],
    smooth_window: int = 21,
    unfolded: bool = False,
    poly_degree: int = 12,
    trim_frac: float = 0.05,
) -> Tuple[SffCurve, SffCurve]:
    """
    SFF всего спектра как одного окна и его скользящее среднее по точкам
    логарифмической сетки.

    Raises:
        ArgumentError: Четное или неположительное smooth_window
    """
    if smooth_window < 1 or smooth_window % 2 == 0:
        raise ArgumentError(f"smooth_window must be odd and >= 1, got {smooth_window}")
    levels = np.asarray(evals, dtype=float) if unfolded else unfold(evals, poly_degree, trim_frac).values
    raw = sff([levels], t_grid)
    smoothed = uniform_filter1d(raw.values, size=smooth_window, mode="nearest")
    return raw, SffCurve(times=raw.times, values=smoothed, window_size=raw.window_size, window_count=1)


def partition_spectrum(evals: Sequence[float], window_size: int) -> List[np.ndarray]:
    e = np.asarray(evals, dtype=float).ravel()
    if window_size <= 1:
        raise ArgumentError(f"Window size must exceed 1, got {window_size}")
    if window_size > e.size:
        raise ArgumentError(f"Window size {window_size} exceeds the spectrum length {e.size}")
    count = e.size // window_size
    start = (e.size - count * window_size) // 2
    return [e[start + k * window_size : start + (k + 1) * window_size] for k in range(count)]
