"""
Иерархия исключений ethlab.

Каждый класс соответствует отдельному коду выхода CLI
(см. ethlab.app.cli.EXIT_CODES).
"""

from typing import Optional


class EthlabError(Exception):
    """Базовое исключение библиотеки."""


class ConfigurationError(EthlabError, ValueError):
    """Недопустимая конфигурация или нарушен ограничитель размерности."""

    def __init__(self, message: str, key_path: Optional[str] = None):
        self.key_path = key_path
        if key_path:
            message = f"{key_path}: {message}"
        super().__init__(message)


class ArgumentError(EthlabError, ValueError):
    """Нарушено предусловие операции."""


class InsufficientDataError(ArgumentError):
    """Слишком мало уровней, выборок или точек в окне."""


class FeasibilityError(EthlabError, ValueError):
    """Анализ невыполним при заданном размере системы."""

    def __init__(self, message: str, constraint: Optional[str] = None):
        self.constraint = constraint
        super().__init__(message)


class ComputationError(EthlabError, RuntimeError):
    """Сбой численной процедуры."""

    def __init__(self, message: str, label: Optional[str] = None):
        self.label = label
        if label:
            message = f"[{label}] {message}"
        super().__init__(message)


class UnfoldingError(ComputationError):
    """Подогнанная ступенчатая функция немонотонна в сохраненном окне."""


class DegenerateFitError(ComputationError):
    """Выборка с нулевой дисперсией: смесь гауссиан не определена."""
