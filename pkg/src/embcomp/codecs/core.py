"""Fit, encode, and decode for every codec family.

Encoding always runs per batch and never mutates inputs. Queries are encoded
with the document-fitted codec so both sides live in the same decoded space;
``query_transform`` provides the asymmetric alternative (lossless side of the
transform only, e.g. full-precision queries against reconstructed PQ docs).
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..store import (
    DTYPE_PACKED,
    FORMAT_VERSION,
    MAGIC,
    HEADER_SIZE,
    EmbeddingMatrix,
    _HEADER,
    ids_path,
)
from .config import CodecConfig
from .floatcast import FORMAT_BITS, cast_decode, cast_encode
from .kmeans import kmeans
from .packing import pack_rows, unpack_rows
from .pca import pca_fit

DEFAULT_KMEANS_ITERS = 25


@dataclass
class FittedCodec:
    """A codec config bound to calibration statistics for one input width.

    Only the fields the method needs are populated; everything else stays
    None. ``codec_id`` hashes the config and the fitted arrays, so encoded
    matrices can only be decoded by the codec that produced them.
    """

    config: CodecConfig
    input_dim: int
    lo: np.ndarray | None = None  # equal_distance clip floor, per dim
    hi: np.ndarray | None = None  # equal_distance clip ceiling, per dim
    boundaries: np.ndarray | None = None  # percentile bin edges (dim, 2**bits + 1)
    reconstruct: np.ndarray | None = None  # percentile mid-quantile levels (dim, 2**bits)
    median: np.ndarray | None = None  # binary median thresholds
    pca_mean: np.ndarray | None = None
    pca_basis: np.ndarray | None = None  # (out_dims, dim)
    lsh_planes: np.ndarray | None = None  # (n_bits, dim)
    pq_codebooks: np.ndarray | None = None  # (n_subvectors, 2**code_bits, subdim)
    _codec_id: str = field(default="", repr=False)

    @property
    def codec_id(self) -> str:
        if not self._codec_id:
            h = hashlib.sha256()
            h.update(self.config.to_json().encode())
            h.update(struct.pack("<I", self.input_dim))
            for name in (
                "lo",
                "hi",
                "boundaries",
                "reconstruct",
                "median",
                "pca_mean",
                "pca_basis",
                "lsh_planes",
                "pq_codebooks",
            ):
                arr = getattr(self, name)
                if arr is not None:
                    h.update(name.encode())
                    h.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
            self._codec_id = h.hexdigest()[:16]
        return self._codec_id

    @property
    def dim_effective(self) -> int:
        return self.config.decoded_dim(self.input_dim)


@dataclass
class EncodedMatrix:
    """Packed codes for one batch, row-padded to whole bytes."""

    codec_id: str
    ids: list[str]
    count: int
    dim_effective: int
    bits_per_vector: int
    codes: np.ndarray  # uint8, shape (count, ceil(bits_per_vector / 8))

    def __post_init__(self):
        expected = (self.bits_per_vector + 7) // 8
        if self.codes.shape != (self.count, expected):
            raise ValueError(
                f"codes shape {self.codes.shape} != ({self.count}, {expected})"
            )

    @property
    def nbytes(self) -> int:
        return int(self.codes.size)


def _working(matrix: EmbeddingMatrix, config: CodecConfig) -> np.ndarray:
    x = matrix.values.astype(np.float64)
    if config.pre_truncate is not None:
        x = x[:, : config.pre_truncate]
    return x


def _quantile_edges(x: np.ndarray, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension percentile bin edges and mid-quantile reconstruction levels.

    Duplicate edges (constant or heavily tied dimensions) are nudged up by the
    smallest representable step to keep edges strictly increasing.
    """
    qs = np.arange(n_bins + 1) / n_bins
    edges = np.quantile(x, qs, axis=0).T  # (dim, n_bins + 1)
    mids = np.quantile(x, (np.arange(n_bins) + 0.5) / n_bins, axis=0).T
    for d in range(edges.shape[0]):
        row = edges[d]
        for j in range(1, len(row)):
            if row[j] <= row[j - 1]:
                row[j] = np.nextafter(row[j - 1], np.inf)
    return edges, mids


def fit(config: CodecConfig, calibration: EmbeddingMatrix) -> FittedCodec:
    """Learn codec parameters from a calibration sample."""
    dim = calibration.dim
    config.validate_for_dim(dim)
    x = _working(calibration, config)
    fc = FittedCodec(config=config, input_dim=dim)
    m, p = config.method, config.params

    if m == "scalar_quant":
        if x.shape[0] < 1:
            raise ValueError("scalar_quant needs a non-empty calibration sample")
        if p["binning"] == "equal_distance":
            fc.lo, fc.hi = np.percentile(x, [2.5, 97.5], axis=0)
        else:
            fc.boundaries, fc.reconstruct = _quantile_edges(x, 1 << p["bits"])
    elif m == "binary" and p["threshold"] == "median":
        if x.shape[0] < 1:
            raise ValueError("binary median needs a non-empty calibration sample")
        fc.median = np.median(x, axis=0)
    elif m == "pca":
        fc.pca_mean, fc.pca_basis = pca_fit(x, p["out_dims"])
    elif m == "lsh":
        rng = np.random.default_rng(config.seed)
        fc.lsh_planes = rng.standard_normal((p["n_bits"], x.shape[1]))
    elif m == "pq":
        k = 1 << p["code_bits"]
        if x.shape[0] < k:
            raise ValueError(
                f"pq needs >= {k} calibration vectors (2**code_bits), got {x.shape[0]}"
            )
        sub = x.shape[1] // p["n_subvectors"]
        books = np.empty((p["n_subvectors"], k, sub), dtype=np.float64)
        for s in range(p["n_subvectors"]):
            part = x[:, s * sub : (s + 1) * sub]
            books[s] = kmeans(part, k, iters=DEFAULT_KMEANS_ITERS, seed=config.seed + s)
        fc.pq_codebooks = books
    return fc


def _scalar_indices(fc: FittedCodec, x: np.ndarray) -> np.ndarray:
    p = fc.config.params
    n_bins = 1 << p["bits"]
    if p["binning"] == "equal_distance":
        lo, hi = fc.lo, fc.hi
        delta = (hi - lo) / n_bins
        v = np.clip(x, lo, hi)
        safe = np.where(delta > 0, delta, 1.0)
        idx = np.floor((v - lo) / safe)
        idx = np.clip(idx, 0, n_bins - 1)
        return np.where(delta > 0, idx, 0.0).astype(np.uint32)
    left = fc.boundaries[:, :n_bins]
    idx = np.empty(x.shape, dtype=np.int64)
    for d in range(x.shape[1]):
        idx[:, d] = np.searchsorted(left[d], x[:, d], side="right") - 1
    return np.clip(idx, 0, n_bins - 1).astype(np.uint32)


def encode(fc: FittedCodec, matrix: EmbeddingMatrix) -> EncodedMatrix:
    """Encode a batch with a fitted codec."""
    if matrix.dim != fc.input_dim:
        raise ValueError(f"dim mismatch: codec fitted for {fc.input_dim}, got {matrix.dim}")
    config = fc.config
    x = _working(matrix, config)
    m, p = config.method, config.params
    n = x.shape[0]
    eff = x.shape[1]

    if m == "identity":
        # float32 -> float64 -> float32 is exact, so identity round-trips bit-for-bit
        codes = np.ascontiguousarray(x, dtype="<f4").view(np.uint8)
        bits = 32 * eff
    elif m == "float_cast":
        raw = cast_encode(x, p["fmt"])
        codes = np.ascontiguousarray(raw).view(np.uint8).reshape(n, -1)
        bits = FORMAT_BITS[p["fmt"]] * eff
    elif m == "scalar_quant":
        codes = pack_rows(_scalar_indices(fc, x), p["bits"])
        bits = p["bits"] * eff
    elif m == "binary":
        thresh = fc.median if p["threshold"] == "median" else 0.0
        codes = pack_rows((x > thresh).astype(np.uint8), 1)
        bits = eff
    elif m == "truncate":
        keep = p["keep_dims"]
        codes = np.ascontiguousarray(x[:, :keep], dtype="<f4").view(np.uint8)
        bits = 32 * keep
    elif m == "pca":
        proj = (x - fc.pca_mean) @ fc.pca_basis.T
        codes = np.ascontiguousarray(proj, dtype="<f4").view(np.uint8)
        bits = 32 * p["out_dims"]
    elif m == "lsh":
        proj = x @ fc.lsh_planes.T
        codes = pack_rows((proj > 0).astype(np.uint8), 1)
        bits = p["n_bits"]
    else:  # pq
        sub = eff // p["n_subvectors"]
        idx = np.empty((n, p["n_subvectors"]), dtype=np.uint32)
        for s in range(p["n_subvectors"]):
            part = x[:, s * sub : (s + 1) * sub]
            book = fc.pq_codebooks[s]
            d2 = (
                (book * book).sum(axis=1)[None, :]
                - 2.0 * (part @ book.T)
            )
            idx[:, s] = np.argmin(d2, axis=1)
        codes = pack_rows(idx, p["code_bits"])
        bits = p["n_subvectors"] * p["code_bits"]

    if codes.shape[0] == 0:
        codes = codes.reshape(0, (bits + 7) // 8)
    return EncodedMatrix(
        codec_id=fc.codec_id,
        ids=list(matrix.ids),
        count=n,
        dim_effective=fc.dim_effective,
        bits_per_vector=bits,
        codes=codes,
    )


def decode(fc: FittedCodec, encoded: EncodedMatrix) -> EmbeddingMatrix:
    """Reconstruct float32 vectors from packed codes."""
    if encoded.codec_id != fc.codec_id:
        raise ValueError(
            f"codec mismatch: encoded with {encoded.codec_id}, decoding with {fc.codec_id}"
        )
    config = fc.config
    m, p = config.method, config.params
    eff = config.effective_dim(fc.input_dim)
    codes = encoded.codes
    n = encoded.count

    if m == "identity":
        values = codes.view("<f4").reshape(n, eff).astype(np.float32)
    elif m == "float_cast":
        fmt = p["fmt"]
        width = FORMAT_BITS[fmt] // 8
        raw = codes.view(np.uint16 if width == 2 else np.uint8).reshape(n, eff)
        values = cast_decode(raw, fmt).reshape(n, eff)
    elif m == "scalar_quant":
        n_bins = 1 << p["bits"]
        idx = unpack_rows(codes, eff, p["bits"])
        if p["binning"] == "equal_distance":
            delta = (fc.hi - fc.lo) / n_bins
            values = (fc.lo + (idx + 0.5) * delta).astype(np.float32)
        else:
            values = fc.reconstruct[np.arange(eff)[None, :], idx].astype(np.float32)
    elif m == "binary":
        bits = unpack_rows(codes, eff, 1)
        values = (bits.astype(np.float32) * 2.0 - 1.0).astype(np.float32)
    elif m == "truncate":
        values = codes.view("<f4").reshape(n, p["keep_dims"]).astype(np.float32)
    elif m == "pca":
        values = codes.view("<f4").reshape(n, p["out_dims"]).astype(np.float32)
    elif m == "lsh":
        bits = unpack_rows(codes, p["n_bits"], 1)
        values = (bits.astype(np.float32) * 2.0 - 1.0).astype(np.float32)
    else:  # pq
        idx = unpack_rows(codes, p["n_subvectors"], p["code_bits"])
        sub = eff // p["n_subvectors"]
        values = np.empty((n, eff), dtype=np.float32)
        for s in range(p["n_subvectors"]):
            values[:, s * sub : (s + 1) * sub] = fc.pq_codebooks[s][idx[:, s]]
    return EmbeddingMatrix(list(encoded.ids), values)


def query_transform(fc: FittedCodec, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Asymmetric-scoring side: apply only the lossless part of the codec.

    Truncation slices, PCA projects, everything else passes through (after
    pre-truncation). Not defined for LSH, whose decoded space is bit signs.
    """
    if matrix.dim != fc.input_dim:
        raise ValueError(f"dim mismatch: codec fitted for {fc.input_dim}, got {matrix.dim}")
    config = fc.config
    if config.method == "lsh":
        raise ValueError("asymmetric scoring is undefined for lsh")
    x = _working(matrix, config)
    if config.method == "truncate":
        x = x[:, : config.params["keep_dims"]]
    elif config.method == "pca":
        x = (x - fc.pca_mean) @ fc.pca_basis.T
    return EmbeddingMatrix(list(matrix.ids), x.astype(np.float32))


# -- optional on-disk cache for encoded matrices ------------------------------


def write_encoded(encoded: EncodedMatrix, path: str) -> None:
    """Dump packed codes: CEMB header with dtype code 1, plus .ids and .meta.json."""
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, DTYPE_PACKED, encoded.dim_effective, encoded.count
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(encoded.codes.tobytes())
    with open(ids_path(path), "w", encoding="utf-8") as f:
        for i in encoded.ids:
            f.write(i)
            f.write("\n")
    meta = {"codec_id": encoded.codec_id, "bits_per_vector": encoded.bits_per_vector}
    with open(path + ".meta.json", "w", encoding="utf-8") as f:
        json.dump(meta, f, sort_keys=True)


def read_encoded(path: str) -> EncodedMatrix:
    with open(path, "rb") as f:
        raw = f.read(HEADER_SIZE)
        if len(raw) < HEADER_SIZE:
            raise ValueError("truncated header")
        magic, version, dtype_code, dim_eff, count = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ValueError(f"magic mismatch: expected {MAGIC!r}, got {magic!r}")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format version {version}")
        if dtype_code != DTYPE_PACKED:
            raise ValueError(f"expected dtype code {DTYPE_PACKED}, got {dtype_code}")
        payload = f.read()
    with open(path + ".meta.json", encoding="utf-8") as f:
        meta = json.load(f)
    bits = int(meta["bits_per_vector"])
    rb = (bits + 7) // 8
    if len(payload) != count * rb:
        raise ValueError(f"truncated payload: expected {count * rb} bytes, found {len(payload)}")
    with open(ids_path(path), encoding="utf-8") as f:
        ids = [line.rstrip("\n") for line in f]
    if len(ids) != count or any(not i for i in ids):
        raise ValueError("ID-count mismatch")
    codes = np.frombuffer(payload, dtype=np.uint8).reshape(count, rb).copy()
    return EncodedMatrix(
        codec_id=str(meta["codec_id"]),
        ids=ids,
        count=count,
        dim_effective=dim_eff,
        bits_per_vector=bits,
        codes=codes,
    )
