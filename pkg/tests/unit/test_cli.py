import argparse

import pytest

from config.settings import Settings
from ethlab.app.cli import (
    EXIT_COMPUTATION,
    EXIT_CONFIG,
    EXIT_FEASIBILITY,
    build_parser,
    exit_code_for,
    resolve_config,
    resolve_threads,
)
from ethlab.errors import (
    ArgumentError,
    ComputationError,
    ConfigurationError,
    FeasibilityError,
    UnfoldingError,
)
from ethlab.tables import TableIOError


@pytest.mark.parametrize("error, code", [
    (ConfigurationError("bad"), EXIT_CONFIG),
    (FeasibilityError("too small"), EXIT_FEASIBILITY),
    (ComputationError("no convergence"), EXIT_COMPUTATION),
    (UnfoldingError("non-monotone"), EXIT_COMPUTATION),
    (TableIOError("cannot write", "/x.csv"), EXIT_COMPUTATION),
    (ArgumentError("precondition"), EXIT_COMPUTATION),
])
def test_exit_codes(error, code):
    """Классы ошибок соответствуют кодам выхода"""
    assert exit_code_for(error) == code


def test_parser_defaults():
    """Без флагов все переопределения пусты"""
    args = build_parser().parse_args(["spectrum"])

    assert args.subcommand == "spectrum"
    assert args.config is None
    assert args.threads is None
    assert args.seed is None
    assert args.system_size is None


def test_parser_flags():
    """Флаги командной строки"""
    args = build_parser().parse_args(
        ["bose-hubbard", "--config", "run.toml", "--out", "res", "--threads", "4", "--seed", "18446744073709551615",
         "--system-size", "12"]
    )

    assert args.threads == 4
    assert args.seed == 2**64 - 1
    assert args.system_size == 12
    assert args.out == "res"


@pytest.mark.parametrize("argv", [
    ["plots"],
    ["spectrum", "--threads", "0"],
    ["spectrum", "--seed", "-1"],
    ["spectrum", "--seed", str(2**64)],
    ["spectrum", "--system-size", "ten"],
])
def test_parser_rejects_invalid_arguments(argv):
    """argparse завершает процесс с кодом 2"""
    with pytest.raises(SystemExit) as exc_info:
        build_parser().parse_args(argv)

    assert exc_info.value.code == 2


def test_threads_precedence(settings_env, monkeypatch):
    """--threads важнее ETHLAB_THREADS, по умолчанию один поток"""
    assert resolve_threads(None, Settings()) == 1
    monkeypatch.setenv("ETHLAB_THREADS", "6")
    assert resolve_threads(None, Settings()) == 6
    assert resolve_threads(2, Settings()) == 2


def test_resolve_config_applies_overrides(tmp_path, make_config):
    """Переопределения из командной строки поверх файла"""
    path = make_config(tmp_path / "run.toml", L=10)
    args = argparse.Namespace(config=str(path), seed=5, system_size=12, out=str(tmp_path / "o"))

    config = resolve_config(args)

    assert config.model.xxz.L == 12
    assert config.sweep.seed == 5
    assert config.output.directory == str(tmp_path / "o")


def test_resolve_config_without_file():
    """Без --config используются значения по умолчанию"""
    args = argparse.Namespace(config=None, seed=None, system_size=None, out=None)

    assert resolve_config(args).model.xxz.L == 14
