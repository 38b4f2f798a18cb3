"""
Контексты точек развертки.

Точка развертки держит спектр и все производные величины, нужные
нескольким семействам таблиц (развернутый спектр, наблюдаемые в
собственном базисе, ансамбли блоков), и вычисляет каждую из них один раз.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Tuple

import numpy as np

from config.experiment import AnalysisConfig, BoseHubbardModelConfig, XxzModelConfig
from ethlab.basis import BosonBasis, SpinBasis
from ethlab.linalg.eigen import EigenbasisObservable, Spectrum, to_eigenbasis
from ethlab.models import XXZ_OBSERVABLES, BoseHubbardParams, XxzParams, build_obs_bh
from ethlab.services.spectrum_service import SpectrumService
from ethlab.spectral import UnfoldedSpectrum, unfold
from ethlab.submatrix import BlockEnsemble, default_trim, extract_blocks, tile_blocks

logger = logging.getLogger(__name__)


def trimmed_levels(evals: np.ndarray, trim_frac: float) -> np.ndarray:
    """Уровни без floor(trim_frac * n) крайних значений с каждой стороны."""
    cut = int(np.floor(trim_frac * evals.size))
    return evals[cut : evals.size - cut]


@dataclass
class XxzPoint:
    """Одно значение h для цепочки XXZ."""

    model: XxzModelConfig
    analysis: AnalysisConfig
    h: float
    spectra: SpectrumService = field(repr=False)
    workers: int = 1
    _blocks: Dict[Tuple[str, str, int], BlockEnsemble] = field(default_factory=dict, repr=False)

    @cached_property
    def params(self) -> XxzParams:
        return XxzParams(L=self.model.L, J=self.model.J, Delta=self.model.Delta, h=self.h)

    @cached_property
    def _basis_and_spectrum(self) -> Tuple[SpinBasis, Spectrum]:
        return self.spectra.xxz_spectrum(self.params)

    @property
    def basis(self) -> SpinBasis:
        return self._basis_and_spectrum[0]

    @property
    def spectrum(self) -> Spectrum:
        return self._basis_and_spectrum[1]

    @property
    def L(self) -> int:
        return self.model.L

    @cached_property
    def unfolded(self) -> UnfoldedSpectrum:
        return unfold(self.spectrum.evals, self.analysis.poly_degree, self.analysis.trim_frac)

    @cached_property
    def observables(self) -> Dict[str, EigenbasisObservable]:
        rotated = {}
        for name in self.model.observables:
            operator = XXZ_OBSERVABLES[name](self.basis)
            rotated[name] = to_eigenbasis(operator, self.spectrum, label=f"{name} h={self.h:g}")
            logger.debug(f"Rotated {operator.label} into the eigenbasis at h={self.h:g}")
        return rotated

    def ratio_blocks(self, name: str) -> BlockEnsemble:
        """Блоки ratio_block_size x ratio_block_count, общие для fig6 и variance_ratio."""
        a = self.analysis
        key = ("ratio", name, a.ratio_block_size)
        if key not in self._blocks:
            Z = self.observables[name]
            self._blocks[key] = extract_blocks(
                Z, a.ratio_block_size, a.ratio_block_count, trim=default_trim(Z.dim, a.block_trim_frac)
            )
        return self._blocks[key]

    def tiled_blocks(self, name: str, M: int) -> BlockEnsemble:
        key = ("tiled", name, M)
        if key not in self._blocks:
            self._blocks[key] = tile_blocks(self.observables[name], M)
        return self._blocks[key]

    def central_block(self, name: str, M: int) -> BlockEnsemble:
        return extract_blocks(self.observables[name], M, 1, trim=0)


@dataclass(frozen=True)
class BoseHubbardRealization:
    params: BoseHubbardParams
    basis: BosonBasis
    spectrum: Spectrum
    observable: EigenbasisObservable


@dataclass
class BoseHubbardPoint:
    """Одно значение U/J со всеми реализациями беспорядка (зерна seed + r)."""

    model: BoseHubbardModelConfig
    analysis: AnalysisConfig
    uj: float
    seed: int
    realizations: int
    spectra: SpectrumService = field(repr=False)
    workers: int = 1

    def realization_params(self, r: int) -> BoseHubbardParams:
        m = self.model
        return BoseHubbardParams(
            L=m.L,
            N=m.N,
            U=self.uj * m.J,
            J=m.J,
            disorder_bound=m.disorder_bound,
            seed=self.seed + r,
        )

    def realization(self, r: int) -> BoseHubbardRealization:
        params = self.realization_params(r)
        basis, spectrum = self.spectra.bose_hubbard_spectrum(params)
        operator = build_obs_bh(basis, self.model.observable, self.model.site)
        Z = to_eigenbasis(operator, spectrum, label=f"{operator.label} U/J={self.uj:g} seed={params.seed}")
        return BoseHubbardRealization(params=params, basis=basis, spectrum=spectrum, observable=Z)

    def block_ensemble(self, Z: EigenbasisObservable) -> BlockEnsemble:
        a = self.analysis
        trim = default_trim(Z.dim, a.block_trim_frac)
        count = a.bh_block_count or (Z.dim - 2 * trim) // a.bh_block_size
        return extract_blocks(Z, a.bh_block_size, count, trim=trim)

    @property
    def seeds(self) -> List[int]:
        return [self.seed + r for r in range(self.realizations)]
