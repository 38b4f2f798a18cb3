"""
Построители таблиц результатов по семействам.

Каждая функция получает контекст точки развертки и возвращает одну
таблицу в длинном формате: строка на точку кривой, столбец source или
observable различает кривые. Скалярные итоги (параметр Броди, средние
<r>, показатель спада eta, параметры смеси) идут в метаданные.
"""

import logging
import math
from typing import Any, Callable, Dict, List

import numpy as np

from ethlab.entanglement import EntropyCurve, spectrum_entropy_curve
from ethlab.errors import ArgumentError, FeasibilityError, InsufficientDataError, UnfoldingError
from ethlab.eth import (
    diagonal_profile,
    gaussianity_ratio,
    offdiag_fits,
    offdiag_histogram,
    offdiag_window,
    variance_profile,
)
from ethlab.services.points import BoseHubbardPoint, XxzPoint, trimmed_levels
from ethlab.spectral import (
    histogram,
    nnsd,
    brody_fit,
    number_variance,
    partition_spectrum,
    reference_curves,
    sff,
    sff_single_realization,
    sff_time_grid,
    spacing_ratios,
    unfold,
)
from ethlab.submatrix import (
    block_as_hamiltonian,
    block_magnitude_dump,
    default_edge_drop,
    ensemble_nnsd,
    ensemble_sff,
    ensemble_spacing_ratios,
    ensemble_variance_ratios,
)
from ethlab.tables import ResultTable
from monitoring.performance import profile

logger = logging.getLogger(__name__)

REFERENCE_POINTS = 201
GAUSSIAN_RATIO_BAND = (1.0, 4.0)

Part = Dict[str, Any]


def _reference_part(kind: str, grid: np.ndarray, key: str, label: str, x: str, y: str, **fixed) -> Part:
    curve = reference_curves(kind, grid, **fixed)
    return {key: label, x: curve[:, 0], y: curve[:, 1]}


def _ratio_histogram_part(ratios: np.ndarray, bins: int, key: str, label: str) -> Part:
    hist = histogram(ratios, bins, (0.0, 1.0))
    return {key: label, "r": hist.centers, "density": hist.densities}


def _t_grid(point) -> np.ndarray:
    a = point.analysis
    return sff_time_grid(a.sff_t_min, a.sff_t_max, a.sff_t_points)


# spectrum

@profile
def fig2a_nnsd(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    u = point.unfolded
    hist = nnsd(u, a.nnsd_bins, a.s_max)
    fit = brody_fit(u.spacings())
    grid = np.linspace(0.0, a.s_max, REFERENCE_POINTS)

    parts = [
        {"curve": "H", "s": hist.centers, "density": hist.densities},
        _reference_part("nnsd_poisson", grid, "curve", "poisson", "s", "density"),
        _reference_part("nnsd_wigner", grid, "curve", "wigner", "s", "density"),
        _reference_part("nnsd_brody", grid, "curve", "brody", "s", "density", gamma=fit.gamma),
    ]
    metadata.update(
        brody_gamma=fit.gamma,
        brody_log_likelihood=fit.log_likelihood,
        levels_retained=int(u.values.size),
        mean_spacing=float(np.mean(u.spacings())),
    )
    if fit.warning:
        metadata["brody_warning"] = fit.warning
    logger.info(f"NNSD at h={point.h:g}: Brody gamma={fit.gamma:.4f}")
    return ResultTable.concat("fig2a_nnsd", parts, metadata)


@profile
def fig2b_numvar(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    grid = np.linspace(a.l_min, a.l_max, a.l_points)
    try:
        curve = number_variance(point.unfolded, grid)
    except ArgumentError as e:
        raise FeasibilityError(str(e), constraint="analysis.l_max") from e

    parts = [
        {"curve": "H", "l": curve.l, "sigma2": curve.sigma2},
        _reference_part("nv_poisson", grid, "curve", "poisson", "l", "sigma2"),
        _reference_part("nv_goe", grid, "curve", "goe", "l", "sigma2"),
    ]
    metadata.update(unfolded_span=point.unfolded.span)
    return ResultTable.concat("fig2b_numvar", parts, metadata)


# eth

@profile
def fig3_diagonals(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    parts = []
    for name, Z in point.observables.items():
        profile = diagonal_profile(Z, point.analysis.delta_eps)
        parts.append({
            "observable": name,
            "eps": profile.eps,
            "value": profile.values,
            "micro_avg": profile.micro_avg,
            "delta_mic": profile.delta_mic,
        })
        metadata[f"{name}_mean_delta_mic"] = float(np.mean(profile.delta_mic))
    metadata["delta_eps"] = point.analysis.delta_eps
    return ResultTable.concat("fig3_diagonals", parts, metadata)


@profile
def fig4_offdiag_hist_and_fits(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    parts = []
    for name, Z in point.observables.items():
        sample = offdiag_window(Z, a.pair_count)
        hist = offdiag_histogram(sample, a.offdiag_bins, a.offdiag_span)
        single, double = offdiag_fits(sample)
        parts.append({
            "observable": name,
            "x": hist.centers,
            "density": hist.densities,
            "fit_k1": single.density(hist.centers),
            "fit_k2": double.density(hist.centers),
        })
        metadata.update({
            f"{name}_pairs": int(sample.values.size),
            f"{name}_first_state": sample.first_state,
            f"{name}_k1_sigma": single.sigmas[0],
            f"{name}_k1_aic": single.aic,
            f"{name}_k2_weight1": double.weights[0],
            f"{name}_k2_weight2": double.weights[1],
            f"{name}_k2_sigma1": double.sigmas[0],
            f"{name}_k2_sigma2": double.sigmas[1],
            f"{name}_k2_aic": double.aic,
            f"{name}_k2_converged": double.converged,
        })
    return ResultTable.concat("fig4_offdiag_hist_and_fits", parts, metadata)


@profile
def fig5_variance_decay(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    parts = []
    for name, Z in point.observables.items():
        try:
            profile = variance_profile(
                Z, point.L, a.ebar_window, a.delta_omega, a.decay_fit_window, a.min_bin_count
            )
        except InsufficientDataError as e:
            if a.decay_fit_window is None:
                raise
            raise FeasibilityError(str(e), constraint="analysis.decay_fit_window") from e

        decay = profile.decay
        if decay is not None:
            fitted = decay.evaluate(profile.omega)
            in_window = (profile.omega >= decay.fit_window[0]) & (profile.omega <= decay.fit_window[1])
            metadata.update({
                f"{name}_eta": decay.eta,
                f"{name}_eta_stderr": decay.eta_stderr,
                f"{name}_prefactor": decay.prefactor,
                f"{name}_fit_lo": decay.fit_window[0],
                f"{name}_fit_hi": decay.fit_window[1],
                f"{name}_fit_points": decay.points,
            })
        else:
            fitted = np.full(profile.omega.shape, np.nan)
            in_window = np.zeros(profile.omega.shape, dtype=bool)
            metadata[f"{name}_eta"] = float("nan")
            metadata[f"{name}_decay_warning"] = profile.warning
        parts.append({
            "observable": name,
            "omega": profile.omega,
            "scaled_variance": profile.scaled_variance,
            "count": profile.counts,
            "fit": fitted,
            "in_fit_window": in_window,
        })
    metadata.update(delta_omega=a.delta_omega, ebar_lo=a.ebar_window[0], ebar_hi=a.ebar_window[1])
    return ResultTable.concat("fig5_variance_decay", parts, metadata)


@profile
def fig9_gaussianity_ratio(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    parts = []
    lo, hi = GAUSSIAN_RATIO_BAND
    for name, Z in point.observables.items():
        profile = gaussianity_ratio(Z, a.ebar_window, a.gaussianity_delta_omega, a.min_bin_count)
        band = (profile.omega >= lo) & (profile.omega <= hi)
        metadata[f"{name}_mean_ratio_{lo:g}_{hi:g}"] = (
            float(np.mean(profile.ratio[band])) if band.any() else float("nan")
        )
        parts.append({"observable": name, "omega": profile.omega, "ratio": profile.ratio, "count": profile.counts})
    metadata.update(gaussian_limit=math.pi / 2, delta_omega=a.gaussianity_delta_omega)
    return ResultTable.concat("fig9_gaussianity_ratio", parts, metadata)


# submatrix

@profile
def fig6_spacing_ratios(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    r_grid = np.linspace(0.0, 1.0, REFERENCE_POINTS)
    s_grid = np.linspace(0.0, a.s_max, REFERENCE_POINTS)
    parts: List[Part] = []

    def ratio_part(source: str, ratios: np.ndarray) -> Part:
        hist = histogram(ratios, a.ratio_bins, (0.0, 1.0))
        return {"statistic": "ratio", "source": source, "x": hist.centers, "density": hist.densities}

    def reference(kind: str, grid: np.ndarray, statistic: str, source: str) -> Part:
        curve = reference_curves(kind, grid)
        return {"statistic": statistic, "source": source, "x": curve[:, 0], "density": curve[:, 1]}

    r_h = spacing_ratios(trimmed_levels(point.spectrum.evals, a.trim_frac))
    parts.append(ratio_part("H", r_h))
    metadata["mean_r_H"] = float(np.mean(r_h))

    edge_drop = a.edge_drop if a.edge_drop is not None else default_edge_drop(a.ratio_block_size)
    for name in point.observables:
        ens = point.ratio_blocks(name)
        r_blocks = ensemble_spacing_ratios(ens, edge_drop, max_workers=point.workers)
        source = f"{name}_blocks_M{ens.M}"
        parts.append(ratio_part(source, r_blocks))
        metadata[f"mean_r_{name}"] = float(np.mean(r_blocks))
        metadata[f"{name}_ratio_blocks"] = ens.count
        metadata[f"{name}_ratio_blocks_overlap"] = ens.overlapping
    parts.append(reference("pr_poisson", r_grid, "ratio", "poisson"))
    parts.append(reference("pr_goe", r_grid, "ratio", "goe"))

    hist = nnsd(point.unfolded, a.nnsd_bins, a.s_max)
    parts.append({"statistic": "nnsd", "source": "H", "x": hist.centers, "density": hist.densities})
    for name in point.observables:
        ens = point.tiled_blocks(name, a.nnsd_block_size)
        block_hist = ensemble_nnsd(ens, a.poly_degree, a.trim_frac, a.nnsd_bins, a.s_max, point.workers)
        parts.append({
            "statistic": "nnsd",
            "source": f"{name}_blocks_M{ens.M}",
            "x": block_hist.centers,
            "density": block_hist.densities,
        })
        metadata[f"{name}_nnsd_blocks"] = ens.count
    parts.append(reference("nnsd_poisson", s_grid, "nnsd", "poisson"))
    parts.append(reference("nnsd_wigner", s_grid, "nnsd", "wigner"))

    metadata.update(
        ratio_block_size=a.ratio_block_size,
        nnsd_block_size=a.nnsd_block_size,
        edge_drop=edge_drop,
    )
    logger.info(
        f"Spacing ratios at h={point.h:g}: "
        + ", ".join(f"{k[7:]}={v:.4f}" for k, v in metadata.items() if k.startswith("mean_r_"))
    )
    return ResultTable.concat("fig6_spacing_ratios", parts, metadata)


@profile
def variance_ratio(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    parts = []
    for name in point.observables:
        ens = point.ratio_blocks(name)
        series = ensemble_variance_ratios(ens)
        parts.append({
            "observable": name,
            "block_index": series.block_index,
            "alpha0": series.alpha0s,
            "ratio": series.ratios,
        })
        metadata[f"{name}_mean_ratio"] = series.mean
        metadata[f"{name}_missing"] = series.missing
        metadata[f"{name}_blocks"] = ens.count
        metadata[f"{name}_trim"] = ens.trim
    metadata["block_size"] = point.analysis.ratio_block_size
    return ResultTable.concat("variance_ratio", parts, metadata)


@profile
def fig1b_block_magnitude(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    M = a.magnitude_block_size
    rows, cols = np.indices((M, M))
    parts = []
    for name in point.observables:
        if a.magnitude_block_index is None:
            ens, index = point.central_block(name, M), 0
        else:
            ens, index = point.tiled_blocks(name, M), a.magnitude_block_index
        grid = block_magnitude_dump(ens, index)
        parts.append({"observable": name, "row": rows.ravel(), "col": cols.ravel(), "magnitude": grid.ravel()})
        metadata[f"{name}_alpha0"] = int(ens.alpha0s[index])
    metadata["block_size"] = M
    return ResultTable.concat("fig1b_block_magnitude", parts, metadata)


# sff

def _hamiltonian_windows(point: XxzPoint, M: int) -> List[np.ndarray]:
    a = point.analysis
    windows = []
    for index, window in enumerate(partition_spectrum(point.spectrum.evals, M)):
        try:
            windows.append(unfold(window, a.poly_degree, a.trim_frac).values)
        except UnfoldingError as e:
            logger.warning(f"Energy window {index} of size {M} at h={point.h:g} skipped: {e}")
    if not windows:
        raise InsufficientDataError(f"No energy window of size {M} could be unfolded at h={point.h:g}")
    return windows


@profile
def fig7_sff(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    t = _t_grid(point)
    parts = []

    def curve_part(source: str, curve) -> Part:
        metadata[f"{source}_windows"] = curve.window_count
        return {"source": source, "t": curve.times, "sff": curve.values, "spread": curve.spread}

    for M in a.sff_block_sizes:
        parts.append(curve_part(f"H_windows_M{M}", sff(_hamiltonian_windows(point, M), t)))
        for name in point.observables:
            ens = point.tiled_blocks(name, M)
            curve = ensemble_sff(ens, t, a.poly_degree, a.trim_frac, point.workers)
            parts.append(curve_part(f"{name}_blocks_M{M}", curve))

    goe = reference_curves("sff_goe", t)
    parts.append({"source": "goe", "t": goe[:, 0], "sff": goe[:, 1], "spread": np.full(t.size, np.nan)})
    return ResultTable.concat("fig7_sff", parts, metadata)


@profile
def fig10_sff_single(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    raw, smoothed = sff_single_realization(
        point.spectrum.evals,
        _t_grid(point),
        smooth_window=a.sff_smooth_window,
        poly_degree=a.poly_degree,
        trim_frac=a.trim_frac,
    )
    metadata.update(levels=raw.window_size, smooth_window=a.sff_smooth_window)
    return ResultTable("fig10_sff_single", {"t": raw.times, "raw": raw.values, "smoothed": smoothed.values}, metadata)


# entropy

def _entropy_part(source: str, curve: EntropyCurve) -> Part:
    page = curve.page()
    return {
        "source": source,
        "L_A": curve.subsystem_sizes,
        "entropy": curve.mean_entropy,
        "normalized": curve.normalized,
        "page": page,
        "page_normalized": page / curve.normalization,
    }


@profile
def fig8_entropy(point: XxzPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    curve = spectrum_entropy_curve(point.spectrum, point.L, a.entropy_states, max_workers=point.workers)
    parts = [_entropy_part("H", curve)]
    metadata["H_states"] = curve.states_averaged
    for name in point.observables:
        ens = point.central_block(name, a.block_entropy_size)
        block_curve = block_as_hamiltonian(ens, a.block_entropy_states, max_workers=point.workers)
        source = f"{name}_block_M{ens.M}"
        parts.append(_entropy_part(source, block_curve))
        metadata[f"{source}_states"] = block_curve.states_averaged
        metadata[f"{source}_alpha0"] = int(ens.alpha0s[0])
    return ResultTable.concat("fig8_entropy", parts, metadata)


# bose-hubbard

@profile
def fig11_bh_spacing_ratios(point: BoseHubbardPoint, metadata: Dict[str, Any]) -> ResultTable:
    a = point.analysis
    edge_drop = a.edge_drop if a.edge_drop is not None else default_edge_drop(a.bh_block_size)
    r_h, r_blocks = [], []
    block_count = 0
    dim = 0
    for r in range(point.realizations):
        realization = point.realization(r)
        dim = realization.spectrum.dim
        r_h.append(spacing_ratios(trimmed_levels(realization.spectrum.evals, a.trim_frac)))
        ens = point.block_ensemble(realization.observable)
        r_blocks.append(ensemble_spacing_ratios(ens, edge_drop, max_workers=point.workers))
        block_count = ens.count

    pooled_h, pooled_blocks = np.concatenate(r_h), np.concatenate(r_blocks)
    grid = np.linspace(0.0, 1.0, REFERENCE_POINTS)
    parts = [
        _ratio_histogram_part(pooled_h, a.ratio_bins, "source", "H"),
        _ratio_histogram_part(pooled_blocks, a.ratio_bins, "source", f"blocks_M{a.bh_block_size}"),
        _reference_part("pr_poisson", grid, "source", "poisson", "r", "density"),
        _reference_part("pr_goe", grid, "source", "goe", "r", "density"),
    ]
    metadata.update(
        mean_r_H=float(np.mean(pooled_h)),
        mean_r_blocks=float(np.mean(pooled_blocks)),
        dim=dim,
        block_size=a.bh_block_size,
        blocks_per_realization=block_count,
        edge_drop=edge_drop,
        realizations=point.realizations,
        seeds=",".join(str(s) for s in point.seeds),
    )
    logger.info(
        f"Bose-Hubbard U/J={point.uj:g}: <r>_H={metadata['mean_r_H']:.4f}, "
        f"<r>_blocks={metadata['mean_r_blocks']:.4f}"
    )
    return ResultTable.concat("fig11_bh_spacing_ratios", parts, metadata)


FamilyBuilder = Callable[[Any, Dict[str, Any]], ResultTable]

XXZ_FAMILIES: Dict[str, FamilyBuilder] = {
    "fig2a_nnsd": fig2a_nnsd,
    "fig2b_numvar": fig2b_numvar,
    "fig3_diagonals": fig3_diagonals,
    "fig4_offdiag_hist_and_fits": fig4_offdiag_hist_and_fits,
    "fig5_variance_decay": fig5_variance_decay,
    "fig9_gaussianity_ratio": fig9_gaussianity_ratio,
    "fig6_spacing_ratios": fig6_spacing_ratios,
    "variance_ratio": variance_ratio,
    "fig1b_block_magnitude": fig1b_block_magnitude,
    "fig7_sff": fig7_sff,
    "fig10_sff_single": fig10_sff_single,
    "fig8_entropy": fig8_entropy,
}

BH_FAMILIES: Dict[str, FamilyBuilder] = {
    "fig11_bh_spacing_ratios": fig11_bh_spacing_ratios,
}
