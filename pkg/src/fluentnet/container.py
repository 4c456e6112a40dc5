"""Deterministic binary container for arrays with a JSON header.

Layout: 8-byte magic, u32 format version, u64 header length, UTF-8 JSON
header, then each array's raw row-major bytes in header order. Every byte is
a function of the payload, so rebuilding the same data yields the same file
hash (unlike zip-based formats, which embed per-member metadata).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"FLNTCNT1"
FORMAT_VERSION = 1

_ALLOWED_DTYPES = {"float32", "float64", "int64", "int32", "int8", "uint8"}


def write_container(path: str | Path, header: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write ``arrays`` (in dict order) with ``header`` metadata to ``path``."""
    index = []
    for name, arr in arrays.items():
        if arr.dtype.name not in _ALLOWED_DTYPES:
            raise ValueError(f"unsupported array dtype {arr.dtype} for {name!r}")
        index.append({"name": name, "dtype": arr.dtype.name, "shape": list(arr.shape)})
    full_header = {"version": FORMAT_VERSION, "arrays": index, "meta": header}
    blob = json.dumps(full_header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for arr in arrays.values():
            fh.write(np.ascontiguousarray(arr).tobytes())


def read_container(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container written by :func:`write_container`.

    Returns (meta, arrays); raises ValueError on a malformed or truncated file.
    """
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a container file (bad magic)")
        version, hlen = struct.unpack("<IQ", fh.read(12))
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        full_header = json.loads(fh.read(hlen).decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        for entry in full_header["arrays"]:
            dtype = np.dtype(entry["dtype"])
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise ValueError(f"{path}: truncated array {entry['name']!r}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return full_header["meta"], arrays
