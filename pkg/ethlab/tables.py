"""
Таблицы результатов в длинном формате и их запись в CSV / JSON.

CSV: строки метаданных "# key=value" над заголовком, числа с 17 значащими
цифрами, NaN записывается пустым полем. JSON: {"metadata": ..., "columns": ...}.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ethlab.errors import ArgumentError, EthlabError

logger = logging.getLogger(__name__)

Column = Union[np.ndarray, Sequence[Any]]


class TableFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class TableIOError(EthlabError, OSError):
    """Ошибка записи или чтения файла таблицы."""

    def __init__(self, message: str, path: Union[str, Path]):
        self.path = str(path)
        super().__init__(f"{message}: {self.path}")


@dataclass
class ResultTable:
    family: str
    columns: Dict[str, Column]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        lengths = {name: len(values) for name, values in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ArgumentError(f"Table {self.family!r} is not rectangular: {lengths}")
        for key in self.metadata:
            if "=" in key or "\n" in key:
                raise ArgumentError(f"Metadata key {key!r} may not contain '=' or newlines")

    @property
    def column_names(self) -> List[str]:
        return list(self.columns)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @classmethod
    def concat(cls, family: str, parts: Sequence[Dict[str, Column]], metadata: Optional[Dict[str, Any]] = None) -> "ResultTable":
        """Склеивает фрагменты с одинаковыми столбцами (по одному на кривую)."""
        names = list(parts[0])
        merged: Dict[str, List[Any]] = {name: [] for name in names}
        for part in parts:
            if list(part) != names:
                raise ArgumentError(f"Table {family!r} fragments disagree on columns: {list(part)} vs {names}")
            n = len(next(iter(part.values())))
            for name in names:
                value = part[name]
                merged[name].extend(value if _is_sequence(value) else [value] * n)
        return cls(family=family, columns=merged, metadata=dict(metadata or {}))


def _is_sequence(value: Any) -> bool:
    return isinstance(value, (list, tuple, np.ndarray))


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else format(float(value), ".17g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    if isinstance(value, (int, np.integer)) and not isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def table_file_name(family: str, param: str, value: float, fmt: TableFormat = TableFormat.CSV) -> str:
    return f"{family}_{param}={format(value, 'g')}.{TableFormat(fmt).value}"


def emit(table: ResultTable, path: Union[str, Path], fmt: Union[TableFormat, str] = TableFormat.CSV) -> Path:
    """
    Записывает таблицу в файл.

    Args:
        table: Таблица результатов
        path: Путь к файлу
        fmt: csv или json

    Returns:
        Путь к записанному файлу

    Raises:
        TableIOError: Ошибка ввода-вывода
    """
    fmt = TableFormat(fmt)
    path = Path(path)
    names = table.column_names
    rows = zip(*(table.columns[name] for name in names))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt is TableFormat.CSV:
            with path.open("w", encoding="utf-8", newline="") as f:
                for key, value in table.metadata.items():
                    f.write(f"# {key}={format_value(value)}\n")
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(names)
                for row in rows:
                    writer.writerow([format_value(v) for v in row])
        else:
            payload = {
                "metadata": {k: _json_value(v) for k, v in table.metadata.items()},
                "columns": {name: [_json_value(v) for v in table.columns[name]] for name in names},
            }
            path.write_text(json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    except OSError as e:
        raise TableIOError(f"Cannot write table {table.family!r} ({e.strerror or e})", path) from e

    logger.debug(f"Wrote {table.family} ({table.n_rows} rows) to {path}")
    return path


def _parse_scalar(text: str) -> Any:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _typed_column(raw: List[str]) -> Column:
    try:
        return np.array([float(v) if v != "" else np.nan for v in raw])
    except ValueError:
        return raw


def read_table(path: Union[str, Path]) -> ResultTable:
    """Читает таблицу, записанную emit; формат определяется по расширению."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TableIOError(f"Cannot read table ({e.strerror or e})", path) from e

    if path.suffix == ".json":
        payload = json.loads(text)
        columns = {}
        for name, values in payload["columns"].items():
            if all(v is None or isinstance(v, (int, float)) for v in values):
                columns[name] = np.array([np.nan if v is None else float(v) for v in values])
            else:
                columns[name] = values
        metadata = payload["metadata"]
    else:
        lines = text.splitlines()
        metadata = {}
        body_start = 0
        for body_start, line in enumerate(lines):
            if not line.startswith("# "):
                break
            key, _, value = line[2:].partition("=")
            metadata[key] = _parse_scalar(value)
        reader = csv.reader(lines[body_start:])
        header = next(reader)
        raw_rows = list(reader)
        columns = {name: _typed_column([row[i] for row in raw_rows]) for i, name in enumerate(header)}

    return ResultTable(family=str(metadata.get("family", path.stem.split("_")[0])), columns=columns, metadata=metadata)
