"""
Конфигурация эксперимента: TOML-файл, проверяемый строгими моделями pydantic.

Неизвестные ключи отклоняются на любом уровне. Ошибки проверки
преобразуются в ConfigurationError с путем к ключу, например
"analysis.delta_eps: Input should be greater than 0".
"""

import hashlib
import json
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ethlab.errors import ConfigurationError
from ethlab.models import BhObservable
from ethlab.tables import TableFormat

logger = logging.getLogger(__name__)

DEFAULT_H_VALUES = [0.01, 0.05, 0.1, 0.2, 0.4, 0.7]
DEFAULT_UJ_VALUES = [0.02, 0.08, 0.4, 1.8, 5.0, 9.0]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _ordered_pair(value: Tuple[float, float], name: str) -> Tuple[float, float]:
    if not value[0] < value[1]:
        raise ValueError(f"{name} must satisfy lower < upper, got {list(value)}")
    return value


class XxzModelConfig(_Strict):
    L: int = Field(default=14, ge=2, le=20, description="Number of spins (even)")
    J: float = Field(default=1.0, allow_inf_nan=False)
    Delta: float = Field(default=math.pi / 4, allow_inf_nan=False)
    observables: List[Literal["T", "O"]] = Field(default_factory=lambda: ["T", "O"], min_length=1)

    @field_validator("L")
    @classmethod
    def validate_even(cls, v: int):
        if v % 2:
            raise ValueError(f"L must be even, got {v}")
        return v


class BoseHubbardModelConfig(_Strict):
    L: int = Field(default=8, ge=1)
    N: int = Field(default=8, ge=0)
    J: float = Field(default=1.0, allow_inf_nan=False)
    disorder_bound: float = Field(default=0.05, ge=0.0)
    observable: BhObservable = Field(default=BhObservable.HALF_CHAIN)
    site: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def validate_site(self):
        if self.observable is BhObservable.SITE and (self.site is None or self.site > self.L):
            raise ValueError(f"site_occupation needs site in 1..{self.L}, got {self.site}")
        return self


class ModelConfig(_Strict):
    xxz: XxzModelConfig = Field(default_factory=XxzModelConfig)
    bose_hubbard: BoseHubbardModelConfig = Field(default_factory=BoseHubbardModelConfig)


class SweepConfig(_Strict):
    h_values: List[float] = Field(default_factory=lambda: list(DEFAULT_H_VALUES), min_length=1)
    uj_values: List[float] = Field(default_factory=lambda: list(DEFAULT_UJ_VALUES), min_length=1)
    seed: int = Field(default=1234, ge=0, lt=2**64)
    realizations: int = Field(default=1, ge=1)


class AnalysisConfig(_Strict):
    # spectral statistics
    poly_degree: int = Field(default=12, ge=3, le=20)
    trim_frac: float = Field(default=0.05, ge=0.0, lt=0.3)
    nnsd_bins: int = Field(default=50, ge=1)
    s_max: float = Field(default=4.0, gt=0.0)
    ratio_bins: int = Field(default=50, ge=1)
    l_min: float = Field(default=1.0, gt=0.0)
    l_max: float = Field(default=25.0, gt=0.0)
    l_points: int = Field(default=49, ge=1)

    # ETH
    delta_eps: float = Field(default=0.02, gt=0.0)
    pair_count: int = Field(default=200, ge=2)
    offdiag_bins: int = Field(default=101, ge=1)
    offdiag_span: float = Field(default=5.0, gt=0.0)
    ebar_window: Tuple[float, float] = (-0.5, 0.5)
    delta_omega: float = Field(default=0.05, gt=0.0)
    gaussianity_delta_omega: float = Field(default=0.1, gt=0.0)
    min_bin_count: int = Field(default=10, ge=1)
    decay_fit_window: Optional[Tuple[float, float]] = None

    # submatrix ensembles
    ratio_block_size: int = Field(default=21, ge=3)
    ratio_block_count: int = Field(default=700, ge=1)
    block_trim_frac: float = Field(default=0.03, ge=0.0, lt=0.5)
    edge_drop: Optional[int] = Field(default=None, ge=0)
    bh_block_size: int = Field(default=50, ge=3)
    bh_block_count: Optional[int] = Field(default=None, ge=1)
    sff_block_sizes: List[int] = Field(default_factory=lambda: [512, 1024], min_length=1)
    nnsd_block_size: int = Field(default=1024, ge=3)
    magnitude_block_size: int = Field(default=512, ge=3)
    magnitude_block_index: Optional[int] = Field(default=None, ge=0)

    # entanglement
    entropy_states: int = Field(default=100, ge=1)
    block_entropy_size: int = Field(default=1024, ge=3)
    block_entropy_states: int = Field(default=20, ge=1)

    # spectral form factor
    sff_t_min: float = Field(default=1e-2, gt=0.0)
    sff_t_max: float = Field(default=1e3, gt=0.0)
    sff_t_points: int = Field(default=400, ge=2)
    sff_smooth_window: int = Field(default=21, ge=1)

    @field_validator("ebar_window")
    @classmethod
    def validate_ebar_window(cls, v):
        return _ordered_pair(v, "ebar_window")

    @field_validator("decay_fit_window")
    @classmethod
    def validate_decay_window(cls, v):
        return v if v is None else _ordered_pair(v, "decay_fit_window")

    @field_validator("sff_smooth_window")
    @classmethod
    def validate_odd(cls, v: int):
        if v % 2 == 0:
            raise ValueError(f"sff_smooth_window must be odd, got {v}")
        return v

    @field_validator("sff_block_sizes")
    @classmethod
    def validate_block_sizes(cls, v: List[int]):
        if any(size < 3 for size in v):
            raise ValueError(f"block sizes must be >= 3, got {v}")
        return v

    @model_validator(mode="after")
    def validate_ranges(self):
        _ordered_pair((self.l_min, self.l_max), "l_min/l_max")
        _ordered_pair((self.sff_t_min, self.sff_t_max), "sff_t_min/sff_t_max")
        return self


class OutputConfig(_Strict):
    directory: str = "results"
    format: TableFormat = TableFormat.CSV


class ExperimentConfig(_Strict):
    model: ModelConfig = Field(default_factory=ModelConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def fingerprint(self) -> str:
        """SHA-256 канонического JSON всех разделов, влияющих на численные результаты."""
        payload = self.model_dump(mode="json", exclude={"output"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _format_validation_error(error: ValidationError) -> ConfigurationError:
    first = error.errors()[0]
    key_path = ".".join(str(part) for part in first["loc"]) or None
    extra = f" (and {error.error_count() - 1} more)" if error.error_count() > 1 else ""
    return ConfigurationError(f"{first['msg']}{extra}", key_path=key_path)


def parse_experiment_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise _format_validation_error(e) from e


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Загружает и проверяет конфигурацию эксперимента.

    Args:
        path: Путь к TOML-файлу

    Returns:
        Проверенный ExperimentConfig

    Raises:
        ConfigurationError: Файл не читается, содержит синтаксическую ошибку
            или не проходит проверку схемы
    """
    path = Path(path)
    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e.strerror or e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Invalid TOML in {path}: {e}") from e

    config = parse_experiment_config(data)
    logger.info(f"Loaded experiment config {path} (fingerprint {config.fingerprint()[:12]})")
    return config


def apply_overrides(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    system_size: Optional[int] = None,
    out: Optional[str] = None,
) -> ExperimentConfig:
    """Применяет переопределения из командной строки и заново проверяет конфигурацию."""
    data = config.model_dump(mode="json")
    if seed is not None:
        data["sweep"]["seed"] = seed
    if system_size is not None:
        data["model"]["xxz"]["L"] = system_size
    if out is not None:
        data["output"]["directory"] = out
    return parse_experiment_config(data)
