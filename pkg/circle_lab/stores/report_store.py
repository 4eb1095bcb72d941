"""
ReportStore for circle-lab.

Writes the JSON report of one command and its flat CSV tables into an
output directory. JSON keys are sorted so identical runs give identical
bytes.
"""
import csv
import dataclasses
import json
import logging
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from circle_lab.version import __version__

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Convert numpy, Fraction, Enum, pydantic and dataclass values to JSON types."""
    if isinstance(value, Enum):
        return value.value
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, Fraction):
        return {"exact": str(value), "float": float(value)}
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(mode="json"))
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


class ReportStore:
    """
    Output directory of one command run.

    Files:
    - report.json: {"op", "params", "values", "fits", "config", "version"}
    - <name>.csv: flat tables for plotting
    - timings.json: performance stats, kept apart from the report
    """

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.written: List[Path] = []

    @property
    def report_path(self) -> Path:
        return self.output_dir / "report.json"

    def _dump(self, path: Path, payload: Any) -> Path:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(to_jsonable(payload), f, indent=2, sort_keys=True)
            f.write("\n")
        self.written.append(path)
        return path

    def write_report(
        self,
        op: str,
        params: Dict[str, Any],
        values: Any,
        fits: Optional[Any] = None,
        config: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """Write report.json; ``config`` is the fully resolved experiment config."""
        payload = {
            "op": op,
            "params": params,
            "values": values,
            "fits": fits,
            "config": config or {},
            "version": __version__,
        }
        path = self._dump(self.report_path, payload)
        logger.info("Report written", extra={"op": op, "path": str(path)})
        return path

    def write_timings(self, stats: Dict[str, Any]) -> Path:
        return self._dump(self.output_dir / "timings.json", stats)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Write ``name``.csv with one header row."""
        path = self.output_dir / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        self.written.append(path)
        return path


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Enum):
        return value.value
    return value
