"""Compression codecs: configs, fitting, encoding, decoding, and the sweep grid."""

from .config import (
    CodecConfig,
    compression_ratio,
    stored_bits_per_vector,
)
from .core import (
    EncodedMatrix,
    FittedCodec,
    decode,
    encode,
    fit,
    query_transform,
    read_encoded,
    write_encoded,
)
from .grid import builtin_grid, lsh_bit_grid, pq_pair_grid, truncation_cutoffs
from .kmeans import kmeans
from .pca import pca_fit

__all__ = [
    "CodecConfig",
    "EncodedMatrix",
    "FittedCodec",
    "builtin_grid",
    "compression_ratio",
    "decode",
    "encode",
    "fit",
    "kmeans",
    "lsh_bit_grid",
    "pca_fit",
    "pq_pair_grid",
    "query_transform",
    "read_encoded",
    "stored_bits_per_vector",
    "truncation_cutoffs",
    "write_encoded",
]
