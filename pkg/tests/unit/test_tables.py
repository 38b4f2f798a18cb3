import json
import math

import numpy as np
import pytest

from ethlab.errors import ArgumentError
from ethlab.tables import (
    ResultTable,
    TableFormat,
    TableIOError,
    emit,
    format_value,
    read_table,
    table_file_name,
)


def test_single_row_table_has_header_and_one_line(tmp_path):
    """Таблица из одной строки: метаданные, заголовок и одна строка"""
    table = ResultTable(family="fig5a", columns={"h": [0.1], "R": [2.5]}, metadata={"family": "fig5a"})

    path = emit(table, tmp_path / "one.csv")

    lines = path.read_text().splitlines()
    assert lines == ["# family=fig5a", "h,R", "0.10000000000000001,2.5"]


def test_csv_round_trip_is_bit_exact(tmp_path, rng):
    """17 значащих цифр сохраняют значения float64 без потерь"""
    values = rng.standard_normal(200) * 10.0 ** rng.integers(-30, 30, 200)
    table = ResultTable(family="fig2a", columns={"x": values, "kind": ["a"] * 200}, metadata={"L": 14, "h": 0.4})

    loaded = read_table(emit(table, tmp_path / "t.csv"))

    assert np.array_equal(loaded.columns["x"], values)
    assert loaded.columns["kind"] == ["a"] * 200
    assert loaded.metadata == {"L": 14, "h": 0.4}


def test_nan_is_written_as_empty_field(tmp_path):
    """NaN записывается пустым полем и читается обратно как NaN"""
    table = ResultTable(family="fig5b", columns={"block": [0, 1], "R": [2.0, float("nan")]})

    path = emit(table, tmp_path / "nan.csv")

    assert path.read_text().splitlines()[-1] == "1,"
    assert math.isnan(read_table(path).columns["R"][1])


def test_json_table(tmp_path):
    """JSON: null вместо NaN, ключи отсортированы"""
    table = ResultTable(
        family="fig3a",
        columns={"eps": np.array([0.5, np.nan]), "n": np.array([3, 4])},
        metadata={"observable": "T", "dim": np.int64(16384)},
    )

    path = emit(table, tmp_path / "t.json", TableFormat.JSON)

    payload = json.loads(path.read_text())
    assert payload["columns"]["eps"] == [0.5, None]
    assert payload["columns"]["n"] == [3, 4]
    assert payload["metadata"] == {"dim": 16384, "observable": "T"}
    loaded = read_table(path)
    assert math.isnan(loaded.columns["eps"][1])


def test_unwritable_path_raises_table_io_error(tmp_path):
    """Каталог на месте файла"""
    blocker = tmp_path / "blocker"
    blocker.write_text("")

    with pytest.raises(TableIOError) as exc_info:
        emit(ResultTable(family="x", columns={"a": [1]}), blocker / "t.csv")

    assert exc_info.value.path.endswith("t.csv")


def test_missing_file_raises_table_io_error(tmp_path):
    """Чтение несуществующего файла"""
    with pytest.raises(TableIOError):
        read_table(tmp_path / "absent.csv")


def test_ragged_table_rejected():
    """Столбцы разной длины"""
    with pytest.raises(ArgumentError):
        ResultTable(family="x", columns={"a": [1, 2], "b": [1]})


def test_metadata_key_with_equals_rejected():
    """Ключ метаданных с '='"""
    with pytest.raises(ArgumentError):
        ResultTable(family="x", columns={"a": [1]}, metadata={"a=b": 1})


def test_concat_broadcasts_scalars():
    """Скалярные значения фрагмента повторяются на все его строки"""
    table = ResultTable.concat("fig2c", [
        {"curve": "data", "l": np.array([1.0, 2.0])},
        {"curve": "poisson", "l": np.array([1.0, 2.0])},
    ])

    assert table.n_rows == 4
    assert table.columns["curve"] == ["data", "data", "poisson", "poisson"]


def test_concat_rejects_mismatched_columns():
    """Фрагменты с разными столбцами"""
    with pytest.raises(ArgumentError):
        ResultTable.concat("x", [{"a": [1]}, {"b": [1]}])


def test_table_file_name():
    """Имя файла семейства для значения параметра"""
    assert table_file_name("fig2a", "h", 0.1) == "fig2a_h=0.1.csv"
    assert table_file_name("fig7", "UJ", 1.8, TableFormat.JSON) == "fig7_UJ=1.8.json"


@pytest.mark.parametrize("value, text", [
    (None, ""),
    (True, "true"),
    (np.int64(7), "7"),
    (float("nan"), ""),
    (0.1, "0.10000000000000001"),
    ("T", "T"),
])
def test_format_value(value, text):
    """Текстовое представление значений ячеек"""
    assert format_value(value) == text
