"""
Нелинейные подгонки: смесь гауссиан с нулевым средним (EM),
экспоненциальный спад дисперсии и распределение Броди (метод
максимального правдоподобия).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special, stats

from ethlab.errors import ArgumentError, ComputationError, DegenerateFitError, InsufficientDataError

logger = logging.getLogger(__name__)

MIN_MIXTURE_SAMPLES = 100
MIN_DECAY_POINTS = 5
MIN_BRODY_SPACINGS = 500
SPACING_FLOOR = 1e-10


@dataclass(frozen=True)
class MixtureFit:
    k: int
    weights: Tuple[float, ...]
    sigmas: Tuple[float, ...]
    log_likelihood: float
    aic: float
    iterations: int
    converged: bool

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(w * stats.norm.pdf(x, loc=0.0, scale=s) for w, s in zip(self.weights, self.sigmas))


@dataclass(frozen=True)
class DecayFit:
    eta: float
    eta_stderr: float
    prefactor: float
    fit_window: Tuple[float, float]
    residual: float
    points: int

    def evaluate(self, omega: np.ndarray) -> np.ndarray:
        return self.prefactor * np.exp(-self.eta * np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class BrodyFit:
    gamma: float
    log_likelihood: float
    sample_count: int
    warning: Optional[str] = None


def _log_components(x2: np.ndarray, weights: np.ndarray, variances: np.ndarray) -> np.ndarray:
    return (
        np.log(weights)[:, np.newaxis]
        - 0.5 * np.log(2 * np.pi * variances)[:, np.newaxis]
        - x2[np.newaxis, :] / (2 * variances[:, np.newaxis])
    )


def fit_gaussian_mixture(
    samples: Sequence[float],
    k: int = 2,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> MixtureFit:
    """
    Подгонка смеси k гауссиан с нулевым средним методом EM.

    Args:
        samples: Выборка (например, недиагональные элементы Z_ab)
        k: Число компонент, 1 или 2
        tol: Порог прироста log-правдоподобия за шаг
        max_iter: Максимум итераций EM

    Returns:
        MixtureFit с sigma_1 <= sigma_2 и AIC = 2p - 2 logL

    Raises:
        InsufficientDataError: Меньше 100 выборок
        DegenerateFitError: Все выборки совпадают
        ComputationError: Правдоподобие уменьшилось между итерациями
    """
    x = np.asarray(samples, dtype=float).ravel()
    if k not in (1, 2):
        raise ArgumentError(f"Mixture component count must be 1 or 2, got {k}")
    if x.size < MIN_MIXTURE_SAMPLES:
        raise InsufficientDataError(f"Mixture fit needs >= {MIN_MIXTURE_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("Mixture fit samples must be finite")
    if np.ptp(x) == 0.0:
        raise DegenerateFitError(f"All {x.size} samples equal {x[0]!r}; mixture widths collapse to zero")

    x2 = x * x
    s = float(np.std(x))

    if k == 1:
        variances = np.array([np.mean(x2)])
        weights = np.array([1.0])
        log_l = float(special.logsumexp(_log_components(x2, weights, variances), axis=0).sum())
        return MixtureFit(
            k=1,
            weights=(1.0,),
            sigmas=(math.sqrt(variances[0]),),
            log_likelihood=log_l,
            aic=2 * 1 - 2 * log_l,
            iterations=1,
            converged=True,
        )

    floor = 1e-12 * s * s
    weights = np.array([0.5, 0.5])
    variances = np.array([(0.3 * s) ** 2, (1.5 * s) ** 2])
    previous = -np.inf
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        log_comp = _log_components(x2, weights, variances)
        log_norm = special.logsumexp(log_comp, axis=0)
        log_l = float(log_norm.sum())

        if log_l < previous - 1e-10 * abs(previous):
            raise ComputationError(
                f"EM log-likelihood decreased at iteration {iterations}: {previous!r} -> {log_l!r}",
                label="gaussian_mixture",
            )
        if log_l - previous < tol:
            converged = True
            break
        previous = log_l

        resp = np.exp(log_comp - log_norm[np.newaxis, :])
        occupancy = np.maximum(resp.sum(axis=1), np.finfo(float).tiny)
        weights = np.maximum(occupancy / x.size, np.finfo(float).tiny)
        weights /= weights.sum()
        variances = np.maximum(resp @ x2 / occupancy, floor)
    else:
        log_l = float(special.logsumexp(_log_components(x2, weights, variances), axis=0).sum())
        logger.warning(f"Gaussian mixture EM did not converge in {max_iter} iterations (logL={log_l:.6f})")

    order = np.argsort(variances)
    sigmas = np.sqrt(variances[order])
    weights = weights[order]
    logger.debug(
        f"Mixture k=2: w={weights.round(4).tolist()}, sigma={sigmas.round(6).tolist()}, "
        f"iterations={iterations}"
    )
    return MixtureFit(
        k=2,
        weights=tuple(float(w) for w in weights),
        sigmas=tuple(float(v) for v in sigmas),
        log_likelihood=log_l,
        aic=2 * 3 - 2 * log_l,
        iterations=iterations,
        converged=converged,
    )


def fit_exponential_decay(
    omegas: Sequence[float],
    variances: Sequence[float],
    window: Tuple[float, float],
) -> DecayFit:
    """
    Линейная регрессия ln(variance) по omega внутри окна, eta = -наклон.

    Raises:
        ArgumentError: Пустое окно, несогласованные массивы или variance <= 0 в окне
        InsufficientDataError: Меньше 5 точек в окне
    """
    omega = np.asarray(omegas, dtype=float)
    values = np.asarray(variances, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    if omega.shape != values.shape:
        raise ArgumentError(f"omegas and variances differ in shape: {omega.shape} vs {values.shape}")
    if not lo < hi:
        raise ArgumentError(f"Decay fit window must satisfy lo < hi, got [{lo}, {hi}]")

    inside = (omega >= lo) & (omega <= hi)
    if inside.sum() < MIN_DECAY_POINTS:
        raise InsufficientDataError(
            f"Decay fit needs >= {MIN_DECAY_POINTS} points in [{lo:g}, {hi:g}], got {int(inside.sum())}"
        )
    if np.any(values[inside] <= 0):
        raise ArgumentError("Variances inside the decay fit window must be positive")

    x = omega[inside]
    y = np.log(values[inside])
    result = stats.linregress(x, y)
    residuals = y - (result.intercept + result.slope * x)
    return DecayFit(
        eta=float(-result.slope),
        eta_stderr=float(result.stderr),
        prefactor=float(np.exp(result.intercept)),
        fit_window=(lo, hi),
        residual=float(np.sqrt(np.mean(residuals**2))),
        points=int(x.size),
    )


def brody_scale(gamma: float) -> float:
    return special.gamma((gamma + 2) / (gamma + 1)) ** (gamma + 1)


def brody_log_likelihood(gamma: float, spacings: np.ndarray) -> float:
    b = brody_scale(gamma)
    s = np.maximum(spacings, SPACING_FLOOR)
    return float(np.sum(np.log((gamma + 1) * b) + gamma * np.log(s) - b * s ** (gamma + 1)))


def fit_brody(spacings: Sequence[float]) -> BrodyFit:
    """
    Оценка параметра Броди gamma в [0, 1] методом максимального правдоподобия.

    Args:
        spacings: Расстояния между соседними развернутыми уровнями (среднее ~ 1)

    Returns:
        BrodyFit; warning заполнен, если правдоподобие плоское на [0, 1]

    Raises:
        InsufficientDataError: Меньше 500 расстояний
        ArgumentError: Отрицательные расстояния
    """
    s = np.asarray(spacings, dtype=float).ravel()
    if s.size < MIN_BRODY_SPACINGS:
        raise InsufficientDataError(f"Brody fit needs >= {MIN_BRODY_SPACINGS} spacings, got {s.size}")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ArgumentError("Brody fit spacings must be finite and non-negative")

    result = optimize.minimize_scalar(
        lambda g: -brody_log_likelihood(g, s),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-6},
    )
    candidates = {float(result.x): -float(result.fun)}
    for edge in (0.0, 1.0):
        candidates[edge] = brody_log_likelihood(edge, s)
    gamma = max(candidates, key=candidates.get)
    log_l = candidates[gamma]

    warning = None
    spread = max(candidates.values()) - min(candidates.values())
    if spread <= 1e-8 * max(1.0, abs(log_l)):
        warning = f"flat Brody likelihood on [0, 1] (spread {spread:.3g}); gamma is not identified"
        logger.warning(f"Brody fit: {warning}")

    return BrodyFit(gamma=gamma, log_likelihood=log_l, sample_count=int(s.size), warning=warning)
