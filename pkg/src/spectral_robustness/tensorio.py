"""Single-file tensor container: one JSON header line + raw float32 payload.

The header is a single UTF-8 line such as
``{"dtype":"f32","shape":[1,2,2],"order":"row-major","byte_order":"little"}``
terminated by a newline and followed immediately by little-endian IEEE-754
binary32 values in row-major order. Write/read round trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import TensorFormatError

_HEADER_KEYS = ("dtype", "shape", "order", "byte_order")


def write_tensor(path, data, shape=None) -> None:
    """Write an array to the container format; fails before touching the file on mismatch."""
    arr = np.asarray(data)
    if shape is None:
        shape = list(arr.shape)
    shape = [int(s) for s in shape]
    count = int(np.prod(shape)) if shape else 1
    if arr.size != count:
        raise TensorFormatError(
            f"data has {arr.size} values but shape {shape} needs {count}"
        )
    payload = np.ascontiguousarray(arr.reshape(-1), dtype="<f4").tobytes()
    header = json.dumps(
        {"dtype": "f32", "shape": shape, "order": "row-major", "byte_order": "little"},
        separators=(",", ":"),
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def read_tensor(path) -> tuple[np.ndarray, list[int]]:
    """Read a container file back as (float32 array, shape)."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise TensorFormatError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"{path}: malformed header: {exc}") from exc
    if not isinstance(header, dict) or set(header) != set(_HEADER_KEYS):
        raise TensorFormatError(f"{path}: header must have keys {_HEADER_KEYS}")
    if header["dtype"] != "f32":
        raise TensorFormatError(f"{path}: unsupported dtype {header['dtype']!r}")
    if header["order"] != "row-major" or header["byte_order"] != "little":
        raise TensorFormatError(f"{path}: unsupported layout {header!r}")
    shape = header["shape"]
    if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 0 for s in shape):
        raise TensorFormatError(f"{path}: bad shape {shape!r}")
    count = int(np.prod(shape)) if shape else 1
    payload = raw[newline + 1 :]
    if len(payload) != 4 * count:
        raise TensorFormatError(
            f"{path}: payload has {len(payload)} bytes, expected {4 * count}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(shape)
    return data, list(shape)
