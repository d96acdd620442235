"""Embedding dataset container and its on-disk "DALB" binary format.

Layout (little-endian):

    magic   "DALB"          4 bytes
    version u32 (= 1)
    n       u64
    d       u32
    k       u32
    dtype   u8  (0 = 32-bit float)
    reserved 11 zero bytes
    features: n * d float32, row-major
    labels:   n * u32, 0-based on disk (1-based in memory)
    metadata: u32 length prefix + UTF-8 JSON object

Features are stored in 32 bits and widened to float64 by consumers that do
inverse arithmetic. Writes are atomic (temp file + rename), so a failed write
never leaves a partial file behind.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataValidationError, FormatError

MAGIC = b"DALB"
VERSION = 1
_HEADER = struct.Struct("<4sIQIIB11s")
_DTYPE_F32 = 0


@dataclass
class EmbeddingDataset:
    """Fixed feature vectors with integer labels in ``1..n_classes``."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        validate_dataset(self)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def validate_dataset(ds: EmbeddingDataset) -> None:
    if ds.features.ndim != 2 or ds.labels.ndim != 1:
        raise DataValidationError("features must be (N, D) with (N,) labels")
    if ds.features.shape[0] != ds.labels.shape[0]:
        raise DataValidationError("feature and label counts differ")
    if ds.features.shape[0] < 1:
        raise DataValidationError("dataset must contain at least one instance")
    if ds.n_classes < 2:
        raise DataValidationError("dataset must declare at least two classes")
    if not np.all(np.isfinite(ds.features)):
        raise DataValidationError("features contain non-finite entries")
    bad = np.flatnonzero((ds.labels < 1) | (ds.labels > ds.n_classes))
    if bad.size:
        raise DataValidationError(
            f"label out of range 1..{ds.n_classes} at record index {int(bad[0])}"
        )
    if not isinstance(ds.metadata, dict):
        raise DataValidationError("metadata must be a dict")


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the same directory plus rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_embeddings(dataset: EmbeddingDataset, path) -> None:
    """Serialize to the DALB layout; the round trip is bit-exact."""
    validate_dataset(dataset)
    n, d = dataset.features.shape
    header = _HEADER.pack(MAGIC, VERSION, n, d, dataset.n_classes, _DTYPE_F32, b"\0" * 11)
    meta_blob = json.dumps(dataset.metadata, sort_keys=True).encode("utf-8")
    parts = [
        header,
        dataset.features.astype("<f4", copy=False).tobytes(order="C"),
        (dataset.labels - 1).astype("<u4").tobytes(),
        struct.pack("<I", len(meta_blob)),
        meta_blob,
    ]
    atomic_write_bytes(path, b"".join(parts))


def read_embeddings(path) -> EmbeddingDataset:
    """Parse a DALB file, validating structure and invariants."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header", offset=len(raw))
    magic, version, n, d, k, dtype, _ = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if dtype != _DTYPE_F32:
        raise FormatError(f"unknown feature dtype code {dtype}", offset=24)
    if n < 1:
        raise DataValidationError("dataset must contain at least one instance (got N=0)")

    offset = _HEADER.size
    feat_bytes = n * d * 4
    if len(raw) < offset + feat_bytes:
        raise FormatError("truncated feature block", offset=len(raw))
    features = np.frombuffer(raw, dtype="<f4", count=n * d, offset=offset).reshape(n, d)
    offset += feat_bytes

    label_bytes = n * 4
    if len(raw) < offset + label_bytes:
        raise FormatError("truncated label block", offset=len(raw))
    raw_labels = np.frombuffer(raw, dtype="<u4", count=n, offset=offset)
    offset += label_bytes

    if len(raw) < offset + 4:
        raise FormatError("truncated metadata length prefix", offset=len(raw))
    (meta_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if len(raw) < offset + meta_len:
        raise FormatError("truncated metadata blob", offset=len(raw))
    if len(raw) > offset + meta_len:
        raise FormatError("trailing bytes after metadata", offset=offset + meta_len)
    try:
        metadata = json.loads(raw[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"metadata is not valid JSON: {exc}", offset=offset) from exc
    if not isinstance(metadata, dict):
        raise FormatError("metadata must be a JSON object", offset=offset)

    bad = np.flatnonzero(raw_labels >= k)
    if bad.size:
        raise DataValidationError(
            f"label {int(raw_labels[bad[0]])} >= K={k} at record index {int(bad[0])}"
        )
    return EmbeddingDataset(
        features=features.copy(),
        labels=raw_labels.astype(np.int64) + 1,
        n_classes=int(k),
        metadata=metadata,
    )
