"""
Unit tests for table dumps and the report store.
"""
import csv
import json
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from circle_lab.errors import TableFormatError
from circle_lab.expsum import grid_sample, nyquist_grid
from circle_lab.stores import ReportStore, export_table_csv, load_table, save_table, to_jsonable
from circle_lab.surfaces import Family


@pytest.mark.unit
class TestFourierTableStore:
    """Test binary table dumps."""

    @pytest.fixture
    def table(self, ones_cubes_4, cubes):
        return grid_sample(ones_cubes_4, cubes, nyquist_grid(cubes, 4, 1, offsets=(0.125,)))

    def test_save_and_load(self, table, tmp_path):
        """Test that a dump keeps grid, provenance and single-precision values."""
        path = save_table(table, tmp_path / "tables" / "cubes.clft")
        loaded = load_table(path)

        assert loaded.grid == table.grid
        assert loaded.provenance["N"] == 4
        assert loaded.provenance["system"]["family"] == "kth_powers"
        np.testing.assert_allclose(loaded.values, table.values, rtol=1e-6, atol=1e-6)
        assert loaded.resample(loaded.grid.doubled()) is None

    def test_bad_magic(self, tmp_path):
        """Test that foreign files are rejected."""
        path = tmp_path / "bogus.clft"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(TableFormatError):
            load_table(path)

    def test_truncated_file(self, tmp_path):
        """Test that a short file is rejected."""
        path = tmp_path / "short.clft"
        path.write_bytes(b"CL")
        with pytest.raises(TableFormatError):
            load_table(path)

    def test_truncated_values(self, table, tmp_path):
        """Test that missing values are detected."""
        path = save_table(table, tmp_path / "cut.clft")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(TableFormatError):
            load_table(path)

    def test_export_csv(self, table, tmp_path):
        """Test the flat CSV export."""
        path = export_table_csv(table, tmp_path / "table.csv")
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["index_1", "alpha_1", "modulus"]
        assert len(rows) == table.grid.size + 1
        assert float(rows[1][1]) == 0.125


@pytest.mark.unit
class TestToJsonable:
    """Test JSON conversion of laboratory values."""

    def test_scalars(self):
        assert to_jsonable(np.int64(3)) == 3
        assert to_jsonable(np.float32(0.5)) == 0.5
        assert to_jsonable(np.bool_(True)) is True
        assert to_jsonable(1 + 2j) == [1.0, 2.0]
        assert to_jsonable(Path("a/b")) == "a/b"

    def test_fraction(self):
        assert to_jsonable(Fraction(1, 8)) == {"exact": "1/8", "float": 0.125}

    def test_containers(self):
        data = {"levels": (1, 2), "set": {3, 1}, "array": np.arange(3), "family": Family.KTH_POWERS}
        assert to_jsonable(data) == {
            "levels": [1, 2],
            "set": [1, 3],
            "array": [0, 1, 2],
            "family": "kth_powers",
        }

    def test_models(self, cubes):
        assert to_jsonable(cubes)["family"] == "kth_powers"

    def test_unknown_type(self):
        with pytest.raises(TypeError):
            to_jsonable(object())


@pytest.mark.unit
class TestReportStore:
    """Test report and CSV output."""

    def test_write_report(self, output_dir):
        """Test that reports carry op, params, values and config."""
        store = ReportStore(output_dir)
        path = store.write_report("divisor", {"Q": 2}, {"moment": 14}, config={"seed": 0})

        data = json.loads(path.read_text())
        assert data["op"] == "divisor"
        assert data["values"] == {"moment": 14}
        assert data["fits"] is None
        assert data["config"] == {"seed": 0}
        assert "version" in data

    def test_sorted_keys(self, output_dir):
        """Test that identical reports are byte-identical."""
        store = ReportStore(output_dir)
        first = store.write_report("x", {"b": 1, "a": 2}, {"z": 0.1, "y": [1, 2]}).read_bytes()
        second = store.write_report("x", {"a": 2, "b": 1}, {"y": [1, 2], "z": 0.1}).read_bytes()
        assert first == second
        assert first.index(b'"a"') < first.index(b'"b"')

    def test_write_csv(self, output_dir):
        """Test CSV rows with floats at full precision."""
        store = ReportStore(output_dir)
        path = store.write_csv("rows", ["N", "value"], [(4, 0.1), (8, np.float64(1 / 3))])
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows == [["N", "value"], ["4", "0.1"], ["8", repr(1 / 3)]]
        assert store.written == [path]

    def test_write_timings(self, output_dir):
        store = ReportStore(output_dir)
        path = store.write_timings({"performance": {}})
        assert path.name == "timings.json"
        assert json.loads(path.read_text()) == {"performance": {}}


class _Color(Enum):
    RED = "red"


@pytest.mark.unit
def test_enum_cells(output_dir):
    """Enum cells are written by value."""
    path = ReportStore(output_dir).write_csv("enum", ["c"], [(_Color.RED,)])
    assert path.read_text().splitlines()[1] == "red"
