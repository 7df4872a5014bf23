"""Experiment orchestration: codec grid x corpus sizes -> result JSONs.

Each (codec, size) cell fits, encodes, decodes, retrieves, and evaluates
independently; a cell failure is recorded and does not stop the sweep. Cell
results are written atomically (temp file + rename) and deterministically
(sorted keys), with wall-clock stamps isolated under metadata.timestamps so
that re-runs can be compared byte-for-byte after stripping that one field.
"""

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .codecs import (
    CodecConfig,
    builtin_grid,
    compression_ratio,
    decode,
    encode,
    fit,
    query_transform,
)
from .corpus import CorpusManifest
from .metrics import MetricReport, evaluate, parse_qrels
from .search import RankedList, top_k, write_trec_run
from .significance import annotate_significance
from .store import EmbeddingMatrix, read_batches, read_header, read_matrix

DEFAULT_KS = (10, 100)
DEFAULT_BATCH = 8192
DEFAULT_CALIBRATION = 100_000


@dataclass
class ExperimentConfig:
    corpus_path: str
    query_path: str
    qrels_path: str
    output_dir: str
    codecs: object = "builtin_grid"  # "builtin_grid" | list[CodecConfig]
    corpus_manifest: str | None = None
    ks: list[int] = field(default_factory=lambda: list(DEFAULT_KS))
    batch_size: int = DEFAULT_BATCH
    seed: int = 0
    native_bits: int = 32
    calibration_size: int = DEFAULT_CALIBRATION
    alpha: float = 0.05
    ndcg_gain: str = "linear"
    asymmetric_queries: bool = False
    save_runs: bool = False

    def to_dict(self) -> dict:
        d = {
            "corpus_path": self.corpus_path,
            "query_path": self.query_path,
            "qrels_path": self.qrels_path,
            "output_dir": self.output_dir,
            "corpus_manifest": self.corpus_manifest,
            "ks": list(self.ks),
            "batch_size": self.batch_size,
            "seed": self.seed,
            "native_bits": self.native_bits,
            "calibration_size": self.calibration_size,
            "alpha": self.alpha,
            "ndcg_gain": self.ndcg_gain,
            "asymmetric_queries": self.asymmetric_queries,
            "save_runs": self.save_runs,
        }
        if isinstance(self.codecs, str):
            d["codecs"] = self.codecs
        else:
            d["codecs"] = [c.to_dict() for c in self.codecs]
        return d

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        codecs = d.get("codecs", "builtin_grid")
        if not isinstance(codecs, str):
            codecs = [CodecConfig.from_dict(c) for c in codecs]
        return cls(
            corpus_path=d["corpus_path"],
            query_path=d["query_path"],
            qrels_path=d["qrels_path"],
            output_dir=d["output_dir"],
            codecs=codecs,
            corpus_manifest=d.get("corpus_manifest"),
            ks=[int(k) for k in d.get("ks", DEFAULT_KS)],
            batch_size=int(d.get("batch_size", DEFAULT_BATCH)),
            seed=int(d.get("seed", 0)),
            native_bits=int(d.get("native_bits", 32)),
            calibration_size=int(d.get("calibration_size", DEFAULT_CALIBRATION)),
            alpha=float(d.get("alpha", 0.05)),
            ndcg_gain=d.get("ndcg_gain", "linear"),
            asymmetric_queries=bool(d.get("asymmetric_queries", False)),
            save_runs=bool(d.get("save_runs", False)),
        )

    @classmethod
    def from_json_file(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class EvalResult:
    label: str
    codec: CodecConfig
    corpus_size: int
    ratio: float
    report: MetricReport
    significance: dict[str, dict] = field(default_factory=dict)  # metric -> TestResult dict
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "codec": self.codec.to_dict(),
                "codec_label": self.label,
                "compression_ratio": self.ratio,
                "corpus_size": self.corpus_size,
                **self.metadata,
            },
            "per_query": self.report.per_query,
            "aggregate": self.report.aggregate,
            "significance": self.significance,
        }


@dataclass
class CellFailure:
    label: str
    corpus_size: int
    error: str


def write_json_atomic(payload: dict, path: str) -> None:
    """Serialize deterministically and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def stream_filtered(
    path: str, batch_size: int, id_set: set[str] | None
) -> Iterator[EmbeddingMatrix]:
    """Stream corpus batches, optionally keeping only ids in ``id_set``.

    Surviving rows are re-chunked into full ``batch_size`` batches so the
    partitioning depends only on content, not on the file's own batching.
    """
    held_ids: list[str] = []
    held_vals: list = []
    held = 0
    for batch in read_batches(path, batch_size):
        if id_set is None:
            keep = batch
        else:
            mask = [i in id_set for i in batch.ids]
            if not any(mask):
                continue
            idx = [j for j, m in enumerate(mask) if m]
            keep = EmbeddingMatrix(
                [batch.ids[j] for j in idx], batch.values[idx]
            )
        held_ids.extend(keep.ids)
        held_vals.append(keep.values)
        held += keep.count
        while held >= batch_size:
            vals = np.vstack(held_vals) if len(held_vals) > 1 else held_vals[0]
            yield EmbeddingMatrix(held_ids[:batch_size], vals[:batch_size])
            held_ids = held_ids[batch_size:]
            held_vals = [vals[batch_size:]]
            held -= batch_size
    if held:
        vals = np.vstack(held_vals) if len(held_vals) > 1 else held_vals[0]
        yield EmbeddingMatrix(held_ids, vals)


def _read_calibration(path: str, batch_size: int, id_set: set[str] | None, limit: int) -> EmbeddingMatrix:
    ids: list[str] = []
    vals: list = []
    total = 0
    for batch in stream_filtered(path, batch_size, id_set):
        take = min(batch.count, limit - total)
        ids.extend(batch.ids[:take])
        vals.append(batch.values[:take])
        total += take
        if total >= limit:
            break
    if total == 0:
        raise ValueError("empty corpus (after manifest filtering)")
    return EmbeddingMatrix(ids, np.vstack(vals))


def evaluate_cell(
    config: ExperimentConfig,
    codec: CodecConfig,
    queries: EmbeddingMatrix,
    qrels,
    id_set: set[str] | None,
) -> tuple[MetricReport, list[RankedList]]:
    """Fit + encode + decode + retrieve + evaluate one grid cell."""
    k_search = max(config.ks)
    per_batch = codec.fit_scope == "per_batch"

    if per_batch:
        batches = stream_filtered(config.corpus_path, config.batch_size, id_set)
        first = next(batches, None)
        if first is None:
            raise ValueError("empty corpus (after manifest filtering)")
        first_codec = fit(codec, first)

        def decoded_stream():
            fc, batch = first_codec, first
            while True:
                yield decode(fc, encode(fc, batch))
                batch = next(batches, None)
                if batch is None:
                    return
                fc = fit(codec, batch)

        query_codec = first_codec
        stream = decoded_stream()
    else:
        calibration = _read_calibration(
            config.corpus_path, config.batch_size, id_set, config.calibration_size
        )
        fitted = fit(codec, calibration)

        def decoded_stream():
            for batch in stream_filtered(config.corpus_path, config.batch_size, id_set):
                yield decode(fitted, encode(fitted, batch))

        query_codec = fitted
        stream = decoded_stream()

    if config.asymmetric_queries and codec.method != "identity":
        q = query_transform(query_codec, queries)
    else:
        q = decode(query_codec, encode(query_codec, queries))
    ranked = top_k(q, stream, k_search)
    report = evaluate(ranked, qrels, config.ks, gain=config.ndcg_gain)
    return report, ranked


def resolve_codecs(config: ExperimentConfig, dim: int) -> list[CodecConfig]:
    if isinstance(config.codecs, str):
        if config.codecs != "builtin_grid":
            raise ValueError(f"unknown codec set {config.codecs!r}")
        codecs = builtin_grid(dim, seed=config.seed)
    else:
        codecs = list(config.codecs)
    n_identity = sum(1 for c in codecs if c.method == "identity")
    if n_identity != 1:
        raise ValueError(f"codec list must include identity exactly once, found {n_identity}")
    labels = [c.label for c in codecs]
    if len(set(labels)) != len(labels):
        raise ValueError("codec labels must be unique")
    # identity is the significance baseline; evaluate it first
    codecs.sort(key=lambda c: c.method != "identity")
    return codecs


def run(config: ExperimentConfig) -> tuple[list[EvalResult], list[CellFailure]]:
    """Run the full sweep; returns results and isolated per-cell failures."""
    os.makedirs(config.output_dir, exist_ok=True)
    header = read_header(config.corpus_path)
    dim = header.dim
    codecs = resolve_codecs(config, dim)
    qrels = parse_qrels(config.qrels_path)
    queries = read_matrix(config.query_path)
    if queries.dim != dim:
        raise ValueError(f"query dim {queries.dim} != corpus dim {dim}")

    if config.corpus_manifest:
        manifest = CorpusManifest.read(config.corpus_manifest)
        size_sets: list[tuple[int, set[str] | None]] = [
            (s, set(manifest.doc_ids[s])) for s in sorted(manifest.sizes)
        ]
    else:
        size_sets = [(header.count, None)]

    results: list[EvalResult] = []
    failures: list[CellFailure] = []
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")

    for size, id_set in size_sets:
        reports: dict[str, MetricReport] = {}
        size_results: list[EvalResult] = []
        for codec in codecs:
            label = codec.label
            t0 = time.time()
            try:
                report, ranked = evaluate_cell(config, codec, queries, qrels, id_set)
            except Exception as exc:  # isolate the cell, keep sweeping
                failures.append(CellFailure(label, size, f"{type(exc).__name__}: {exc}"))
                continue
            reports[label] = report
            if config.save_runs:
                run_path = os.path.join(
                    config.output_dir, f"run_{label}_{size}.trec"
                )
                write_trec_run(ranked, run_path, tag=label)
            result = EvalResult(
                label=label,
                codec=codec,
                corpus_size=size,
                ratio=compression_ratio(codec, dim, config.native_bits),
                report=report,
                metadata={
                    "config_hash": config.config_hash(),
                    "dataset": os.path.basename(config.corpus_path),
                    "dim": dim,
                    "native_bits": config.native_bits,
                    "n_queries": len(report.per_query),
                    "ndcg_gain": config.ndcg_gain,
                    "asymmetric_queries": config.asymmetric_queries,
                    "unjudged_queries": report.unjudged,
                    "no_relevant_queries": report.no_relevant,
                    "timestamps": {
                        "run_started": started,
                        "cell_seconds": round(time.time() - t0, 3),
                    },
                },
            )
            size_results.append(result)

        if "identity" in reports:
            metric_keys = sorted(reports["identity"].aggregate)
            for result in size_results:
                if result.label == "identity":
                    continue
                pair = {"identity": reports["identity"], result.label: reports[result.label]}
                sig = {}
                for metric in metric_keys:
                    try:
                        tests = annotate_significance(
                            pair, "identity", metric, alpha=config.alpha
                        )
                    except ValueError:
                        continue  # metric missing for some queries
                    sig[metric] = tests[result.label].to_dict()
                result.significance = sig

        for result in size_results:
            out = os.path.join(
                config.output_dir, f"result_{result.label}_{result.corpus_size}.json"
            )
            write_json_atomic(result.to_dict(), out)
            results.append(result)

    return results, failures
