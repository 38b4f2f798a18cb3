"""
Оркестрация экспериментов: проверка выполнимости, развертка по h и U/J,
построение таблиц семейств и их запись.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Tuple

from config.experiment import ExperimentConfig
from config.settings import Settings
from ethlab import __version__
from ethlab.errors import ConfigurationError, FeasibilityError
from ethlab.eth import MIN_DIAGONAL_DIM
from ethlab.linalg.fitting import MIN_BRODY_SPACINGS, MIN_MIXTURE_SAMPLES
from ethlab.services.families import BH_FAMILIES, XXZ_FAMILIES
from ethlab.services.points import BoseHubbardPoint, XxzPoint
from ethlab.services.spectrum_service import SpectrumService
from ethlab.spectral import MIN_NNSD_LEVELS
from ethlab.submatrix import (
    MIN_NNSD_BLOCK,
    MIN_SFF_BLOCK,
    default_edge_drop,
    default_trim,
    max_block_count,
)
from ethlab.tables import ResultTable, emit, table_file_name
from monitoring.metrics import PrometheusMetrics
from workers.sweep import SweepPoint, SweepWorker

logger = logging.getLogger(__name__)

SUBCOMMAND_FAMILIES: Dict[str, Tuple[str, ...]] = {
    "spectrum": ("fig2a_nnsd", "fig2b_numvar"),
    "eth": ("fig3_diagonals", "fig4_offdiag_hist_and_fits", "fig5_variance_decay", "fig9_gaussianity_ratio"),
    "submatrix": ("fig6_spacing_ratios", "variance_ratio", "fig1b_block_magnitude"),
    "sff": ("fig7_sff", "fig10_sff_single"),
    "entropy": ("fig8_entropy",),
    "bose-hubbard": ("fig11_bh_spacing_ratios",),
}
SUBCOMMAND_FAMILIES["all"] = tuple(f for families in SUBCOMMAND_FAMILIES.values() for f in families)

SUBCOMMANDS = tuple(SUBCOMMAND_FAMILIES)


def _infeasible(constraint: str, message: str) -> FeasibilityError:
    return FeasibilityError(f"{constraint}: {message}", constraint=constraint)


class ExperimentService:

    def __init__(
        self,
        settings: Settings,
        config: ExperimentConfig,
        spectrum_service: SpectrumService,
        max_workers: int = 1,
    ):
        self.settings = settings
        self.config = config
        self.spectrum_service = spectrum_service
        self.max_workers = max_workers
        self.config_hash = config.fingerprint()

    @property
    def output_dir(self) -> Path:
        return Path(self.config.output.directory)

    @staticmethod
    def families_for(subcommand: str) -> Tuple[str, ...]:
        try:
            return SUBCOMMAND_FAMILIES[subcommand]
        except KeyError:
            raise ConfigurationError(
                f"Unknown subcommand {subcommand!r}; expected one of {', '.join(SUBCOMMANDS)}"
            ) from None

    def check_feasibility(self, subcommand: str) -> None:
        """
        Проверяет, что все анализы подкоманды выполнимы при заданных размерах.

        Raises:
            FeasibilityError: Первое нарушенное ограничение (с путем к ключу конфигурации)
        """
        families = set(self.families_for(subcommand))
        a = self.config.analysis
        xxz = self.config.model.xxz
        dim = 1 << xxz.L

        if families & {"fig2a_nnsd", "fig2b_numvar", "fig6_spacing_ratios"}:
            retained = dim - 2 * math.floor(a.trim_frac * dim)
            if retained < MIN_NNSD_LEVELS:
                raise _infeasible("model.xxz.L", f"{retained} unfolded levels, NNSD needs >= {MIN_NNSD_LEVELS}")
            if "fig2a_nnsd" in families and retained - 1 < MIN_BRODY_SPACINGS:
                raise _infeasible(
                    "model.xxz.L", f"{retained - 1} spacings, Brody fit needs >= {MIN_BRODY_SPACINGS}"
                )
            if "fig2b_numvar" in families and a.l_max > (retained - 1) / 10:
                raise _infeasible(
                    "analysis.l_max", f"{a.l_max:g} exceeds span/10 = {(retained - 1) / 10:.4g} of the unfolded spectrum"
                )

        if families & {"fig3_diagonals", "fig4_offdiag_hist_and_fits"}:
            if dim < MIN_DIAGONAL_DIM:
                raise _infeasible("model.xxz.L", f"dim {dim} < {MIN_DIAGONAL_DIM} needed for diagonal profiles")
            if a.pair_count > dim / 4:
                raise _infeasible("analysis.pair_count", f"{a.pair_count} exceeds dim/4 = {dim // 4}")
            if a.pair_count * (a.pair_count - 1) // 2 < MIN_MIXTURE_SAMPLES:
                raise _infeasible(
                    "analysis.pair_count", f"{a.pair_count} states give fewer than {MIN_MIXTURE_SAMPLES} pairs"
                )

        if families & {"fig6_spacing_ratios", "variance_ratio"}:
            trim = default_trim(dim, a.block_trim_frac)
            feasible = max_block_count(dim, a.ratio_block_size, trim)
            if feasible == 0 or a.ratio_block_count > feasible:
                raise _infeasible(
                    "analysis.ratio_block_count",
                    f"{a.ratio_block_count} blocks of size {a.ratio_block_size} exceed the maximum {feasible} "
                    f"at dim {dim} with trim {trim}",
                )
            edge_drop = a.edge_drop if a.edge_drop is not None else default_edge_drop(a.ratio_block_size)
            if a.ratio_block_size - 2 * edge_drop < 4:
                raise _infeasible("analysis.edge_drop", f"{edge_drop} leaves fewer than 4 levels per block")

        if "fig6_spacing_ratios" in families:
            self._check_block_size("analysis.nnsd_block_size", a.nnsd_block_size, dim, minimum=MIN_NNSD_BLOCK)

        if "fig1b_block_magnitude" in families:
            self._check_block_size("analysis.magnitude_block_size", a.magnitude_block_size, dim)
            if a.magnitude_block_index is not None and a.magnitude_block_index >= dim // a.magnitude_block_size:
                raise _infeasible(
                    "analysis.magnitude_block_index",
                    f"{a.magnitude_block_index} outside 0..{dim // a.magnitude_block_size - 1}",
                )

        if "fig7_sff" in families:
            for M in a.sff_block_sizes:
                self._check_block_size("analysis.sff_block_sizes", M, dim, minimum=MIN_SFF_BLOCK)

        if "fig8_entropy" in families:
            if a.entropy_states > dim:
                raise _infeasible("analysis.entropy_states", f"{a.entropy_states} exceeds dim {dim}")
            M = a.block_entropy_size
            self._check_block_size("analysis.block_entropy_size", M, dim)
            if M & (M - 1):
                raise _infeasible("analysis.block_entropy_size", f"{M} is not a power of two")
            if a.block_entropy_states > M:
                raise _infeasible("analysis.block_entropy_states", f"{a.block_entropy_states} exceeds block size {M}")

        if "fig11_bh_spacing_ratios" in families:
            bh = self.config.model.bose_hubbard
            bh_dim = math.comb(bh.L + bh.N - 1, bh.N)
            trim = default_trim(bh_dim, a.block_trim_frac)
            feasible = max_block_count(bh_dim, a.bh_block_size, trim)
            if feasible == 0:
                raise _infeasible(
                    "analysis.bh_block_size", f"{a.bh_block_size} does not fit into dim {bh_dim} with trim {trim}"
                )
            if a.bh_block_count is not None and a.bh_block_count > feasible:
                raise _infeasible(
                    "analysis.bh_block_count", f"{a.bh_block_count} exceeds the maximum {feasible} at dim {bh_dim}"
                )
            edge_drop = a.edge_drop if a.edge_drop is not None else default_edge_drop(a.bh_block_size)
            if a.bh_block_size - 2 * edge_drop < 4:
                raise _infeasible("analysis.edge_drop", f"{edge_drop} leaves fewer than 4 levels per block")

    @staticmethod
    def _check_block_size(constraint: str, M: int, dim: int, minimum: int = 3) -> None:
        if M > dim:
            raise _infeasible(constraint, f"block size {M} exceeds dim {dim}")
        if M < minimum:
            raise _infeasible(constraint, f"block size {M} is below the minimum {minimum}")

    def _point_workers(self, point_count: int) -> int:
        return max(1, self.max_workers // max(1, min(self.max_workers, point_count)))

    def _base_metadata(self, family: str) -> Dict[str, Any]:
        return {
            "family": family,
            "config_hash": self.config_hash,
            "seed": self.config.sweep.seed,
            "code_version": __version__,
        }

    def _xxz_tables(self, h: float, families: Tuple[str, ...], workers: int) -> List[ResultTable]:
        xxz = self.config.model.xxz
        point = XxzPoint(model=xxz, analysis=self.config.analysis, h=h, spectra=self.spectrum_service, workers=workers)
        tables = []
        for family in families:
            metadata = self._base_metadata(family)
            metadata.update(model="xxz", L=xxz.L, J=xxz.J, Delta=xxz.Delta, h=h, dim=1 << xxz.L)
            tables.append(XXZ_FAMILIES[family](point, metadata))
            logger.info(f"Built {family} at h={h:g}")
        return tables

    def _bh_tables(self, uj: float, families: Tuple[str, ...], workers: int) -> List[ResultTable]:
        bh = self.config.model.bose_hubbard
        sweep = self.config.sweep
        point = BoseHubbardPoint(
            model=bh,
            analysis=self.config.analysis,
            uj=uj,
            seed=sweep.seed,
            realizations=sweep.realizations,
            spectra=self.spectrum_service,
            workers=workers,
        )
        tables = []
        for family in families:
            metadata = self._base_metadata(family)
            metadata.update(
                model="bose_hubbard",
                L=bh.L,
                N=bh.N,
                J=bh.J,
                U_over_J=uj,
                disorder_bound=bh.disorder_bound,
                observable=bh.observable.value,
            )
            tables.append(BH_FAMILIES[family](point, metadata))
            logger.info(f"Built {family} at U/J={uj:g}")
        return tables

    def sweep_points(self, subcommand: str) -> List[SweepPoint]:
        families = self.families_for(subcommand)
        xxz_families = tuple(f for f in families if f in XXZ_FAMILIES)
        bh_families = tuple(f for f in families if f in BH_FAMILIES)
        sweep = self.config.sweep

        count = (len(sweep.h_values) if xxz_families else 0) + (len(sweep.uj_values) if bh_families else 0)
        workers = self._point_workers(count)

        points = []
        if xxz_families:
            for h in sweep.h_values:
                points.append(SweepPoint(
                    subcommand=subcommand,
                    param="h",
                    value=h,
                    compute=lambda h=h: self._xxz_tables(h, xxz_families, workers),
                ))
        if bh_families:
            for uj in sweep.uj_values:
                points.append(SweepPoint(
                    subcommand=subcommand,
                    param="uj",
                    value=uj,
                    compute=lambda uj=uj: self._bh_tables(uj, bh_families, workers),
                ))
        return points

    async def run(self, subcommand: str) -> List[Path]:
        """
        Выполняет подкоманду и записывает таблицы.

        Args:
            subcommand: spectrum, eth, submatrix, sff, entropy, bose-hubbard или all

        Returns:
            Пути записанных файлов в порядке развертки

        Raises:
            ConfigurationError: Неизвестная подкоманда или недопустимые параметры модели
            FeasibilityError: Анализ невыполним при заданном размере
            ComputationError: Сбой численной процедуры
            TableIOError: Ошибка записи таблицы
        """
        self.check_feasibility(subcommand)
        points = self.sweep_points(subcommand)
        logger.info(
            f"Running {subcommand}: {len(points)} sweep points, "
            f"{len(self.families_for(subcommand))} families, config {self.config_hash[:12]}"
        )
        results = await SweepWorker(self.max_workers).run(points)

        fmt = self.config.output.format
        written = []
        for result in results:
            for table in result.tables:
                path = self.output_dir / table_file_name(table.family, result.point.param, result.point.value, fmt)
                written.append(emit(table, path, fmt))
                PrometheusMetrics.increment_tables_written(table.family)
        logger.info(f"{subcommand}: wrote {len(written)} tables to {self.output_dir}")
        return written
