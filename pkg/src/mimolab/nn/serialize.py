"""Flat binary checkpoint container.

Layout (all integers little-endian):

    bytes 0-4   magic b"MLAB" + format version byte (currently 1)
    bytes 5-8   uint32 length of the JSON header
    header      UTF-8 JSON: {"meta": {...}, "arrays": [{"name", "shape"}, ...]}
    payload     for each entry of "arrays", in order: raw float64
                little-endian values, C order, prod(shape) of them

The header is serialized with sorted keys and no whitespace so identical
model state produces byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"MLAB"
FORMAT_VERSION = 1


def save_arrays(path, meta: dict, arrays: list[tuple[str, np.ndarray]]) -> None:
    header = {
        "meta": meta,
        "arrays": [{"name": name, "shape": list(arr.shape)} for name, arr in arrays],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC + bytes([FORMAT_VERSION]))
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for _, arr in arrays:
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_arrays(path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"not a checkpoint file: {path}")
    if raw[4] != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {raw[4]}")
    (hlen,) = struct.unpack("<I", raw[5:9])
    header = json.loads(raw[9 : 9 + hlen].decode("utf-8"))
    offset = 9 + hlen
    arrays = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape)
        arrays[spec["name"]] = arr.astype(np.float64)  # writable copy
        offset += count * 8
    if offset != len(raw):
        raise ValueError("checkpoint payload length mismatch")
    return header["meta"], arrays
