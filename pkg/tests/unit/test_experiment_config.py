import math

import pytest

from config.experiment import (
    DEFAULT_H_VALUES,
    DEFAULT_UJ_VALUES,
    ExperimentConfig,
    apply_overrides,
    load_experiment_config,
    parse_experiment_config,
)
from ethlab.errors import ConfigurationError
from ethlab.models import BhObservable
from ethlab.tables import TableFormat


def test_defaults():
    """Значения по умолчанию"""
    config = ExperimentConfig()

    assert config.model.xxz.L == 14
    assert config.model.xxz.Delta == pytest.approx(math.pi / 4)
    assert config.model.bose_hubbard.N == 8
    assert config.model.bose_hubbard.disorder_bound == 0.05
    assert config.model.bose_hubbard.observable is BhObservable.HALF_CHAIN
    assert config.sweep.h_values == DEFAULT_H_VALUES
    assert config.sweep.uj_values == DEFAULT_UJ_VALUES
    assert config.analysis.poly_degree == 12
    assert config.analysis.ratio_block_size == 21
    assert config.analysis.ratio_block_count == 700
    assert config.output.format is TableFormat.CSV


def test_load_minimal_file(tmp_path, make_config):
    """Заданные ключи переопределяют значения по умолчанию"""
    path = make_config(tmp_path / "run.toml", L=12, h_values=(0.2,), out=tmp_path / "res")

    config = load_experiment_config(path)

    assert config.model.xxz.L == 12
    assert config.sweep.h_values == [0.2]
    assert config.sweep.seed == 7
    assert config.output.directory == (tmp_path / "res").as_posix()
    assert config.analysis.delta_eps == 0.02


def test_unknown_key_reports_path(tmp_path, make_config):
    """Неизвестный ключ отклоняется с путем к нему"""
    path = make_config(tmp_path / "run.toml", extra="\n[analysis]\ndelta_epsilon = 0.1\n")

    with pytest.raises(ConfigurationError) as exc_info:
        load_experiment_config(path)

    assert exc_info.value.key_path == "analysis.delta_epsilon"


@pytest.mark.parametrize("data, key_path", [
    ({"sweep": {"h_values": []}}, "sweep.h_values"),
    ({"model": {"xxz": {"L": 7}}}, "model.xxz.L"),
    ({"model": {"xxz": {"L": 22}}}, "model.xxz.L"),
    ({"analysis": {"sff_smooth_window": 20}}, "analysis.sff_smooth_window"),
    ({"analysis": {"delta_eps": 0.0}}, "analysis.delta_eps"),
    ({"analysis": {"ebar_window": [0.5, -0.5]}}, "analysis.ebar_window"),
    ({"sweep": {"seed": -1}}, "sweep.seed"),
    ({"output": {"format": "xlsx"}}, "output.format"),
])
def test_invalid_values_report_path(data, key_path):
    """Недопустимые значения отклоняются с путем к ключу"""
    with pytest.raises(ConfigurationError) as exc_info:
        parse_experiment_config(data)

    assert exc_info.value.key_path == key_path
    assert str(exc_info.value).startswith(key_path)


def test_site_observable_needs_site():
    """site_occupation без номера узла"""
    with pytest.raises(ConfigurationError):
        parse_experiment_config({"model": {"bose_hubbard": {"observable": "site_occupation"}}})


def test_invalid_toml(tmp_path):
    """Синтаксическая ошибка TOML"""
    path = tmp_path / "bad.toml"
    path.write_text("[model\nL = 3\n")

    with pytest.raises(ConfigurationError):
        load_experiment_config(path)


def test_missing_file(tmp_path):
    """Файл не существует"""
    with pytest.raises(ConfigurationError):
        load_experiment_config(tmp_path / "absent.toml")


def test_overrides_are_revalidated():
    """Переопределения из командной строки проходят ту же проверку"""
    config = apply_overrides(ExperimentConfig(), seed=99, system_size=10, out="elsewhere")

    assert config.sweep.seed == 99
    assert config.model.xxz.L == 10
    assert config.output.directory == "elsewhere"

    with pytest.raises(ConfigurationError) as exc_info:
        apply_overrides(ExperimentConfig(), system_size=9)
    assert exc_info.value.key_path == "model.xxz.L"


def test_fingerprint_ignores_output_section():
    """Каталог вывода не влияет на хэш конфигурации, зерно влияет"""
    base = ExperimentConfig()

    assert apply_overrides(base, out="other").fingerprint() == base.fingerprint()
    assert apply_overrides(base, seed=1).fingerprint() != base.fingerprint()
    assert len(base.fingerprint()) == 64
