"""embcomp: embedding-compression codecs with exact retrieval evaluation."""

from .codecs import (
    CodecConfig,
    EncodedMatrix,
    FittedCodec,
    builtin_grid,
    compression_ratio,
    decode,
    encode,
    fit,
)
from .metrics import MetricReport, Qrels, evaluate, parse_qrels
from .pipeline import ExperimentConfig, EvalResult, run
from .search import RankedList, ShardResult, cosine, merge_shards, top_k, write_trec_run
from .significance import PairedSample, TestResult, annotate_significance, wilcoxon_one_sided
from .store import (
    EmbeddingMatrix,
    SyntheticSpec,
    generate_synthetic,
    read_batches,
    read_header,
    read_matrix,
    write_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "CodecConfig",
    "EmbeddingMatrix",
    "EncodedMatrix",
    "EvalResult",
    "ExperimentConfig",
    "FittedCodec",
    "MetricReport",
    "PairedSample",
    "Qrels",
    "RankedList",
    "ShardResult",
    "SyntheticSpec",
    "TestResult",
    "annotate_significance",
    "builtin_grid",
    "compression_ratio",
    "cosine",
    "decode",
    "encode",
    "evaluate",
    "fit",
    "generate_synthetic",
    "merge_shards",
    "parse_qrels",
    "read_batches",
    "read_header",
    "read_matrix",
    "run",
    "top_k",
    "wilcoxon_one_sided",
    "write_matrix",
    "write_trec_run",
]
