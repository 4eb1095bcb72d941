"""
Binary dumps of FourierTables.

Layout: magic b"CLFT", uint32 format version, uint32 header length, a UTF-8
JSON header {dims, offsets, provenance}, then little-endian complex64
values in row-major order.
"""
import csv
import json
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from circle_lab.errors import TableFormatError
from circle_lab.expsum import FourierTable, TorusGrid
from circle_lab.stores.report_store import to_jsonable

logger = logging.getLogger(__name__)

MAGIC = b"CLFT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")
_VALUE_DTYPE = np.dtype("<c8")

PathLike = Union[str, Path]


def save_table(table: FourierTable, path: PathLike) -> Path:
    """Write ``table`` to ``path``; values are stored in single precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps(
        {
            "dims": list(table.grid.dims),
            "offsets": list(table.grid.offsets),
            "provenance": to_jsonable(table.provenance),
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)))
        f.write(header)
        f.write(np.ascontiguousarray(table.values, dtype=_VALUE_DTYPE).tobytes(order="C"))
    logger.debug("Saved Fourier table", extra={"path": str(path), "dims": list(table.grid.dims)})
    return path


def load_table(path: PathLike) -> FourierTable:
    """Read a dump written by save_table. The loaded table has no resampler."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _PREFIX.size:
        raise TableFormatError(f"{path} is too short for a table header")
    magic, version, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise TableFormatError(f"{path} is not a Fourier table dump", context={"magic": repr(magic)})
    if version != FORMAT_VERSION:
        raise TableFormatError(
            f"unsupported table format version {version}", context={"version": version}
        )
    start = _PREFIX.size
    header = json.loads(data[start : start + header_len].decode("utf-8"))
    grid = TorusGrid(tuple(header["dims"]), tuple(header["offsets"]))
    values = np.frombuffer(data, dtype=_VALUE_DTYPE, offset=start + header_len)
    if values.size != grid.size:
        raise TableFormatError(
            f"expected {grid.size} values, found {values.size}",
            context={"path": str(path)},
        )
    return FourierTable(grid, values.astype(np.complex128), header.get("provenance", {}))


def export_table_csv(table: FourierTable, path: PathLike) -> Path:
    """Rows index_1..index_r, alpha_1..alpha_r, modulus."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    r = table.grid.r
    modulus = table.modulus
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow([f"index_{i + 1}" for i in range(r)] + [f"alpha_{i + 1}" for i in range(r)] + ["modulus"])
        for index in np.ndindex(*table.grid.dims):
            point = table.grid.point(index)
            writer.writerow(list(index) + [repr(float(x)) for x in point] + [repr(float(modulus[index]))])
    return path
