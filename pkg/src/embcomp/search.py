"""Exact brute-force cosine top-k over streamed corpus batches.

Scores are cosine similarities computed with 64-bit accumulation for dots and
norms, stored as float32. Zero vectors score 0 against everything. Incoming
batches are re-buffered into fixed-size internal tiles, so every query/doc
pair is scored inside an identically shaped matmul no matter how the stream
was partitioned — results are therefore independent of batch boundaries.
Equal scores break ties toward the lexicographically smaller doc id.
"""

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .store import EmbeddingMatrix

_TILE_ROWS = 4096


@dataclass
class RankedList:
    query_id: str
    entries: list[tuple[str, float]]  # (doc_id, score), best first


@dataclass
class ShardResult:
    shard: str
    lists: list[RankedList]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity with float64 accumulation; zero vectors score 0."""
    a = np.asarray(u, dtype=np.float64).ravel()
    b = np.asarray(v, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dim mismatch: {a.shape} vs {b.shape}")
    na = float(np.sqrt(a @ a))
    nb = float(np.sqrt(b @ b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float((a @ b) / (na * nb))


def _select_topk(
    scores: np.ndarray, ids: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact top-k of one score row under the (-score, doc_id) order."""
    n = scores.shape[0]
    if k < n:
        part = np.argpartition(-scores, k - 1)[:k]
        kth = scores[part].min()
        cand = np.flatnonzero(scores >= kth)  # keep every boundary tie
    else:
        cand = np.arange(n)
    order = np.lexsort((ids[cand], -scores[cand]))
    keep = cand[order[:k]]
    return scores[keep], ids[keep]


def _iter_tiles(
    batches: Iterable[EmbeddingMatrix], dim: int, tile_rows: int
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Re-chunk a batch stream into fixed-size (values, ids) tiles."""
    buf_vals: list[np.ndarray] = []
    buf_ids: list[str] = []
    held = 0
    for batch in batches:
        if batch.dim != dim:
            raise ValueError(f"dim mismatch: queries are {dim}-d, corpus batch is {batch.dim}-d")
        buf_vals.append(batch.values)
        buf_ids.extend(batch.ids)
        held += batch.count
        while held >= tile_rows:
            vals = np.vstack(buf_vals) if len(buf_vals) > 1 else buf_vals[0]
            yield vals[:tile_rows], np.asarray(buf_ids[:tile_rows])
            buf_vals = [vals[tile_rows:]]
            buf_ids = buf_ids[tile_rows:]
            held -= tile_rows
    if held:
        vals = np.vstack(buf_vals) if len(buf_vals) > 1 else buf_vals[0]
        if vals.shape[0]:
            yield vals, np.asarray(buf_ids)


def top_k(
    queries: EmbeddingMatrix,
    corpus_batches: Iterable[EmbeddingMatrix],
    k: int,
    tile_rows: int = _TILE_ROWS,
) -> list[RankedList]:
    """Exact top-k cosine retrieval for every query over a streamed corpus.

    Returns one RankedList per query in query order, each with
    ``min(k, corpus size)`` entries.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = queries.values.astype(np.float64)
    qn = np.sqrt((q * q).sum(axis=1))
    q_zero = qn == 0.0
    qn_safe = np.where(q_zero, 1.0, qn)
    nq = queries.count

    best_scores: list[np.ndarray] = [np.empty(0, dtype=np.float32) for _ in range(nq)]
    best_ids: list[np.ndarray] = [np.empty(0, dtype="<U1") for _ in range(nq)]

    for tile_vals, tile_ids in _iter_tiles(corpus_batches, queries.dim, tile_rows):
        t = tile_vals.astype(np.float64)
        tn = np.sqrt((t * t).sum(axis=1))
        t_zero = tn == 0.0
        tn_safe = np.where(t_zero, 1.0, tn)
        s = (q @ t.T) / (qn_safe[:, None] * tn_safe[None, :])
        if q_zero.any():
            s[q_zero, :] = 0.0
        if t_zero.any():
            s[:, t_zero] = 0.0
        s32 = s.astype(np.float32)
        for i in range(nq):
            t_scores, t_ids = _select_topk(s32[i], tile_ids, k)
            if best_scores[i].size:
                merged_s = np.concatenate([best_scores[i], t_scores])
                merged_i = np.concatenate([best_ids[i], t_ids])
            else:
                merged_s, merged_i = t_scores, t_ids
            order = np.lexsort((merged_i, -merged_s))[:k]
            best_scores[i] = merged_s[order]
            best_ids[i] = merged_i[order]

    return [
        RankedList(
            query_id=queries.ids[i],
            entries=[(str(d), float(s)) for d, s in zip(best_ids[i], best_scores[i])],
        )
        for i in range(nq)
    ]


def merge_shards(shards: Sequence[ShardResult], k: int) -> list[RankedList]:
    """Combine per-shard top-k lists over disjoint doc sets into global top-k.

    Raises if any doc id appears in more than one shard for the same query.
    """
    if not shards:
        return []
    by_query: dict[str, list[tuple[str, float, str]]] = {}
    query_order: list[str] = []
    for shard in shards:
        for rl in shard.lists:
            if rl.query_id not in by_query:
                by_query[rl.query_id] = []
                query_order.append(rl.query_id)
            by_query[rl.query_id].extend(
                (doc, score, shard.shard) for doc, score in rl.entries
            )
    out = []
    for qid in query_order:
        rows = by_query[qid]
        seen: dict[str, str] = {}
        for doc, _, shard_tag in rows:
            if doc in seen:
                raise ValueError(
                    f"doc {doc!r} for query {qid!r} appears in shards "
                    f"{seen[doc]!r} and {shard_tag!r}"
                )
            seen[doc] = shard_tag
        rows.sort(key=lambda r: (-r[1], r[0]))
        out.append(RankedList(qid, [(doc, score) for doc, score, _ in rows[:k]]))
    return out


def write_trec_run(lists: Sequence[RankedList], path: str, tag: str = "embcomp") -> None:
    """Emit ``qid Q0 docid rank score tag`` lines, ranks starting at 1."""
    with open(path, "w", encoding="utf-8") as f:
        for rl in lists:
            for rank, (doc, score) in enumerate(rl.entries, start=1):
                f.write(f"{rl.query_id} Q0 {doc} {rank} {score:.6f} {tag}\n")
