"""Binary embedding storage and synthetic corpus generation.

File layout (little-endian throughout):

    offset  size  field
    0       4     magic ``CEMB``
    4       4     format version (u32, currently 1)
    8       4     dtype code (u32; 0 = float32 rows, 1 = packed codec output)
    12      4     dim (u32)
    16      8     count (u64)
    24      --    payload, ``count * dim * 4`` bytes for dtype 0

Document ids live in a UTF-8 sidecar at ``<path>.ids``: one id per line,
exactly ``count`` non-empty lines, no trailing blank line.
"""

import os
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

MAGIC = b"CEMB"
FORMAT_VERSION = 1
DTYPE_FLOAT32 = 0
DTYPE_PACKED = 1

_HEADER = struct.Struct("<4sIIIQ")
HEADER_SIZE = _HEADER.size  # 24 bytes


@dataclass(frozen=True)
class EmbeddingFileHeader:
    version: int
    dtype_code: int
    dim: int
    count: int


@dataclass
class EmbeddingMatrix:
    """A block of float32 embeddings with aligned string ids."""

    ids: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        if len(self.ids) != self.values.shape[0]:
            raise ValueError(
                f"id/row mismatch: {len(self.ids)} ids for {self.values.shape[0]} rows"
            )

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic clustered corpus."""

    seed: int
    dim: int
    n_clusters: int
    cluster_spread: float
    count: int

    def __post_init__(self):
        if self.dim < 1 or self.n_clusters < 1 or self.count < 0:
            raise ValueError("dim and n_clusters must be >= 1, count >= 0")
        if self.cluster_spread < 0:
            raise ValueError("cluster_spread must be non-negative")


def ids_path(path: str) -> str:
    return str(path) + ".ids"


def _check_finite(values: np.ndarray) -> None:
    finite = np.isfinite(values)
    if not finite.all():
        r, c = np.argwhere(~finite)[0]
        raise ValueError(f"non-finite value at row {r}, col {c}")


def _check_ids(ids: list[str]) -> None:
    if any(not i for i in ids):
        raise ValueError("empty id")
    if len(set(ids)) != len(ids):
        seen: set[str] = set()
        for i in ids:
            if i in seen:
                raise ValueError(f"duplicate id {i!r}")
            seen.add(i)


def write_matrix(matrix: EmbeddingMatrix, path: str) -> None:
    """Write a matrix and its id sidecar. Rejects non-finite values and duplicate ids."""
    _check_finite(matrix.values)
    _check_ids(matrix.ids)
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, DTYPE_FLOAT32, matrix.dim, matrix.count
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())
    with open(ids_path(path), "w", encoding="utf-8") as f:
        for i in matrix.ids:
            f.write(i)
            f.write("\n")


def read_header(path: str) -> EmbeddingFileHeader:
    with open(path, "rb") as f:
        raw = f.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise ValueError("truncated header")
    magic, version, dtype_code, dim, count = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise ValueError(f"magic mismatch: expected {MAGIC!r}, got {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    return EmbeddingFileHeader(version, dtype_code, dim, count)


def read_batches(path: str, batch_size: int) -> Iterator[EmbeddingMatrix]:
    """Stream a float32 embedding file in batches of ``batch_size`` rows.

    The final batch holds the remainder; batch boundaries never change values.
    Raises on magic/version mismatch, truncated payload, id-count mismatch,
    and non-finite values.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    header = read_header(path)
    if header.dtype_code != DTYPE_FLOAT32:
        raise ValueError(f"expected dtype code {DTYPE_FLOAT32}, got {header.dtype_code}")
    expected = header.count * header.dim * 4
    payload = os.path.getsize(path) - HEADER_SIZE
    if payload < expected:
        raise ValueError(f"truncated payload: expected {expected} bytes, found {payload}")
    if payload > expected:
        raise ValueError(f"oversized payload: expected {expected} bytes, found {payload}")

    with open(path, "rb") as f, open(ids_path(path), encoding="utf-8") as idf:
        f.seek(HEADER_SIZE)
        remaining = header.count
        while remaining > 0:
            n = min(batch_size, remaining)
            raw = f.read(n * header.dim * 4)
            ids = []
            for _ in range(n):
                line = idf.readline()
                if not line:
                    raise ValueError(
                        f"ID-count mismatch: sidecar ended before {header.count} ids"
                    )
                ident = line.rstrip("\n")
                if not ident:
                    raise ValueError("ID-count mismatch: blank line in sidecar")
                ids.append(ident)
            values = np.frombuffer(raw, dtype="<f4").reshape(n, header.dim)
            _check_finite(values)
            yield EmbeddingMatrix(ids, values.copy())
            remaining -= n
        if idf.read(1):
            raise ValueError(
                f"ID-count mismatch: sidecar has more than {header.count} lines"
            )


def read_matrix(path: str) -> EmbeddingMatrix:
    """Load a whole embedding file; validates ids (uniqueness) and payload."""
    header = read_header(path)
    batches = list(read_batches(path, batch_size=max(1, header.count)))
    if not batches:
        ids: list[str] = []
        values = np.zeros((0, header.dim), dtype=np.float32)
    else:
        ids = [i for b in batches for i in b.ids]
        values = np.vstack([b.values for b in batches])
    _check_ids(ids)
    return EmbeddingMatrix(ids, values)


def generate_synthetic(spec: SyntheticSpec) -> EmbeddingMatrix:
    """Draw a clustered corpus: unit-sphere centers plus Gaussian noise.

    Row ``i`` belongs to cluster ``i % n_clusters`` and its vector is
    ``centers[i % n_clusters] + noise`` with per-coordinate noise of standard
    deviation ``cluster_spread``. Identical specs produce identical bytes.
    Ids are ``doc0 .. doc{count-1}``.
    """
    rng = np.random.default_rng(spec.seed)
    centers = rng.standard_normal((spec.n_clusters, spec.dim))
    norms = np.linalg.norm(centers, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    centers /= norms
    noise = rng.standard_normal((spec.count, spec.dim)) * spec.cluster_spread
    assign = np.arange(spec.count) % spec.n_clusters
    values = (centers[assign] + noise).astype(np.float32)
    ids = [f"doc{i}" for i in range(spec.count)]
    return EmbeddingMatrix(ids, values)
