"""Standalone writer for the DALB embedding container.

This package talks to the selection engine only through its public file
format, so the byte layout is implemented here independently (little-endian):

    magic "DALB" | u32 version=1 | u64 n | u32 d | u32 k | u8 dtype=0 |
    11 reserved zero bytes | n*d float32 row-major | n u32 labels (0-based) |
    u32 metadata length | UTF-8 JSON object

Files are written via a temp file plus rename, so a failure never leaves a
partial output behind.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

MAGIC = b"DALB"
VERSION = 1
_HEADER = struct.Struct("<4sIQIIB11s")


def write_dalb(path, features: np.ndarray, labels0: np.ndarray, n_classes: int, metadata: dict) -> None:
    """Serialize features (N, D) float32 and 0-based labels (N,) atomically."""
    features = np.ascontiguousarray(features, dtype=np.float32)
    labels0 = np.ascontiguousarray(labels0, dtype=np.int64)
    if features.ndim != 2 or labels0.ndim != 1 or features.shape[0] != labels0.shape[0]:
        raise ValueError("features must be (N, D) with matching (N,) labels")
    n, d = features.shape
    if n < 1:
        raise ValueError("refusing to write an empty dataset")
    if not np.all(np.isfinite(features)):
        raise ValueError("features contain non-finite entries")
    if labels0.min() < 0 or labels0.max() >= n_classes:
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")

    blob = json.dumps(metadata, sort_keys=True).encode("utf-8")
    payload = b"".join(
        [
            _HEADER.pack(MAGIC, VERSION, n, d, n_classes, 0, b"\0" * 11),
            features.astype("<f4", copy=False).tobytes(order="C"),
            labels0.astype("<u4").tobytes(),
            struct.pack("<I", len(blob)),
            blob,
        ]
    )
    directory = os.path.dirname(os.path.abspath(os.fspath(path)))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-dalb-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
