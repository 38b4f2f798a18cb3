"""
Командная строка ethlab.

    ethlab <subcommand> [--config PATH] [--out DIR] [--threads N] [--seed S] [--system-size L]

Коды выхода: 0 - успех, 2 - ошибка конфигурации, 3 - анализ невыполним,
4 - вычислительная ошибка или ошибка ввода-вывода.
"""

import argparse
import asyncio
import logging
import sys
import uuid
from typing import Dict, Optional, Sequence, Type

from config.experiment import ExperimentConfig, apply_overrides, load_experiment_config
from config.settings import Settings, get_settings
from ethlab import __version__
from ethlab.errors import ComputationError, ConfigurationError, EthlabError, FeasibilityError
from ethlab.services import ExperimentService, SpectrumService
from ethlab.services.experiment_service import SUBCOMMANDS
from monitoring import finalize_monitoring, setup_monitoring
from monitoring.logging import set_run_context
from monitoring.metrics import PrometheusMetrics
from monitoring.sentry import capture_exception

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FEASIBILITY = 3
EXIT_COMPUTATION = 4

# порядок важен: первый подходящий класс задает код
EXIT_CODES: Dict[Type[BaseException], int] = {
    ConfigurationError: EXIT_CONFIG,
    FeasibilityError: EXIT_FEASIBILITY,
    EthlabError: EXIT_COMPUTATION,
}


def exit_code_for(error: BaseException) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(error, cls):
            return code
    return EXIT_COMPUTATION


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _seed(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {value!r}") from None
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit into an unsigned 64-bit integer, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ethlab",
        description="Exact-diagonalization diagnostics of eigenstate thermalization and spectral statistics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Group of result tables to produce.")
    parser.add_argument("--config", default=None, help="Experiment config (TOML). Built-in defaults when omitted.")
    parser.add_argument("--out", default=None, help="Output directory, overrides output.directory.")
    parser.add_argument("--threads", type=_positive_int, default=None, help="Worker pool size (default: ETHLAB_THREADS or 1).")
    parser.add_argument("--seed", type=_seed, default=None, help="Base seed, overrides sweep.seed.")
    parser.add_argument("--system-size", type=_positive_int, default=None, help="XXZ chain length, overrides model.xxz.L.")
    return parser


def resolve_threads(flag: Optional[int], settings: Settings) -> int:
    if flag is not None:
        return flag
    return settings.ETHLAB_THREADS or 1


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    Загружает конфигурацию эксперимента и применяет переопределения из командной строки.

    Raises:
        ConfigurationError: Файл недоступен или не проходит проверку
    """
    config = load_experiment_config(args.config) if args.config else ExperimentConfig()
    return apply_overrides(config, seed=args.seed, system_size=args.system_size, out=args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Разбирает аргументы, выполняет подкоманду и возвращает код выхода."""
    args = build_parser().parse_args(argv)
    settings = get_settings()
    run_id = uuid.uuid4().hex
    setup_monitoring(settings, run_id)

    try:
        config = resolve_config(args)
        set_run_context(run_id, config.fingerprint())
        threads = resolve_threads(args.threads, settings)
        logger.info(f"Run {run_id[:8]}: {args.subcommand} with {threads} thread(s), ethlab {__version__}")

        spectra = SpectrumService(settings)
        service = ExperimentService(settings, config, spectra, max_workers=threads)
        written = asyncio.run(service.run(args.subcommand))
        logger.info(
            f"Run {run_id[:8]} finished: {len(written)} tables, "
            f"{spectra.eigendecompositions} eigendecompositions, cache hits {spectra.cache_hits}"
        )
        return EXIT_OK
    except EthlabError as e:
        code = exit_code_for(e)
        PrometheusMetrics.increment_errors(type(e).__name__, "cli")
        if isinstance(e, ComputationError):
            capture_exception(e, extra={"subcommand": args.subcommand, "run_id": run_id})
            logger.error(f"Computation failed: {e}", exc_info=True)
        else:
            logger.error(str(e))
        print(f"ethlab: error: {e}", file=sys.stderr)
        return code
    except KeyboardInterrupt:
        logger.info("Run interrupted")
        return 130
    except Exception as e:
        # numpy/scipy и MemoryError за пределами обертки ComputationError
        PrometheusMetrics.increment_errors(type(e).__name__, "cli")
        capture_exception(e, extra={"subcommand": args.subcommand, "run_id": run_id})
        logger.error(f"Unexpected failure: {e!r}", exc_info=True)
        print(f"ethlab: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_COMPUTATION
    finally:
        finalize_monitoring(settings)


if __name__ == "__main__":
    sys.exit(main())
