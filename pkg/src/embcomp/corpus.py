"""Controlled corpus construction from TREC run pools.

Workflow: parse runs -> drop the weakest fraction by mean NDCG@10 ->
reciprocal-rank-fusion -> mine hard distractors (top-fused docs that are
judged non-relevant or unjudged) -> assemble nested corpora of fixed sizes
around the mandatory doc set (all relevant docs plus all distractors).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .metrics import Qrels, ndcg_at_k
from .search import RankedList

DEFAULT_K_RRF = 60
DEFAULT_N_DISTRACTORS = 100
DEFAULT_DROP_FRACTION = 0.2

# run_tag -> query_id -> [(doc_id, rank, score)] sorted by rank
RunPool = dict[str, dict[str, list[tuple[str, int, float]]]]
FusedRanking = dict[str, list[tuple[str, float]]]
DistractorSet = dict[str, list[str]]


@dataclass
class CorpusManifest:
    """Nested corpus definition: each size's doc set contains the smaller ones."""

    sizes: list[int]
    seed: int
    doc_ids: dict[int, list[str]]  # size -> sorted ids
    counts: dict[str, int] = field(default_factory=dict)
    nested: bool = True
    k_rrf: int = DEFAULT_K_RRF

    def to_dict(self) -> dict:
        return {
            "nested": self.nested,
            "seed": self.seed,
            "sizes": list(self.sizes),
            "k_rrf": self.k_rrf,
            "counts": dict(self.counts),
            "corpora": {str(s): self.doc_ids[s] for s in self.sizes},
        }

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, sort_keys=True)

    @classmethod
    def read(cls, path: str) -> "CorpusManifest":
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        sizes = [int(s) for s in d["sizes"]]
        doc_ids = {int(s): list(ids) for s, ids in d["corpora"].items()}
        return cls(
            sizes=sizes,
            seed=int(d["seed"]),
            doc_ids=doc_ids,
            counts={k: int(v) for k, v in d.get("counts", {}).items()},
            nested=bool(d.get("nested", True)),
            k_rrf=int(d.get("k_rrf", DEFAULT_K_RRF)),
        )


def parse_run(path: str) -> tuple[str, dict[str, list[tuple[str, int, float]]]]:
    """Parse one TREC run file; returns (run_tag, per-query entries by rank).

    Lines are ``qid Q0 docid rank score tag``. Rejects malformed lines,
    duplicate (query, doc) pairs, mixed tags, and non-increasing ranks.
    """
    entries: dict[str, list[tuple[str, int, float]]] = {}
    tag: str | None = None
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 6:
                raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
            qid, _, doc, rank_s, score_s, line_tag = parts
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise ValueError(f"line {lineno}: bad rank/score {rank_s!r}/{score_s!r}")
            if rank < 1:
                raise ValueError(f"line {lineno}: rank must be >= 1, got {rank}")
            if tag is None:
                tag = line_tag
            elif line_tag != tag:
                raise ValueError(
                    f"line {lineno}: mixed run tags {tag!r} and {line_tag!r}"
                )
            if (qid, doc) in seen:
                raise ValueError(f"line {lineno}: duplicate entry for ({qid}, {doc})")
            seen.add((qid, doc))
            entries.setdefault(qid, []).append((doc, rank, score))
    if tag is None:
        raise ValueError("empty run file")
    for qid, rows in entries.items():
        rows.sort(key=lambda r: r[1])
        for a, b in zip(rows, rows[1:]):
            if b[1] <= a[1]:
                raise ValueError(f"query {qid}: ranks not strictly increasing")
    return tag, entries


def load_run_pool(paths: list[str]) -> RunPool:
    pool: RunPool = {}
    for p in paths:
        tag, entries = parse_run(p)
        if tag in pool:
            raise ValueError(f"duplicate run tag {tag!r}")
        pool[tag] = entries
    return pool


def _run_mean_ndcg10(entries: dict[str, list[tuple[str, int, float]]], qrels: Qrels) -> float:
    vals = []
    for qid in sorted(entries):
        if qid not in qrels:
            continue
        ranking = [doc for doc, _, _ in entries[qid]]
        vals.append(ndcg_at_k(ranking, qrels[qid], 10))
    if not vals:
        return 0.0
    return sum(vals) / len(vals)


def filter_runs(pool: RunPool, qrels: Qrels, drop_fraction: float = DEFAULT_DROP_FRACTION) -> RunPool:
    """Drop the weakest ``drop_fraction`` of runs by mean NDCG@10.

    Keeps ceil((1 - f) * |runs|); ties at the cutoff break by run tag.
    """
    if not 0.0 <= drop_fraction < 1.0:
        raise ValueError("drop_fraction must be in [0, 1)")
    scored = sorted(
        ((tag, _run_mean_ndcg10(entries, qrels)) for tag, entries in pool.items()),
        key=lambda t: (t[1], t[0]),
    )
    n_drop = int(np.floor(drop_fraction * len(scored)))
    kept = {tag for tag, _ in scored[n_drop:]}
    return {tag: pool[tag] for tag in pool if tag in kept}


def rrf_fuse(pool: RunPool, k_rrf: int = DEFAULT_K_RRF) -> FusedRanking:
    """Reciprocal rank fusion: score(d) = sum over runs of 1 / (k_rrf + rank).

    Output per query is sorted by descending fused score, doc id ascending on
    ties.
    """
    if k_rrf < 0:
        raise ValueError("k_rrf must be >= 0")
    if not pool:
        raise ValueError("empty run pool")
    fused: dict[str, dict[str, float]] = {}
    for entries in pool.values():
        for qid, rows in entries.items():
            bucket = fused.setdefault(qid, {})
            for doc, rank, _ in rows:
                bucket[doc] = bucket.get(doc, 0.0) + 1.0 / (k_rrf + rank)
    out: FusedRanking = {}
    for qid, scores in fused.items():
        out[qid] = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return out


def mine_distractors(
    fused: FusedRanking,
    qrels: Qrels,
    n_distractors: int = DEFAULT_N_DISTRACTORS,
) -> DistractorSet:
    """Per query: the first ``n_distractors`` fused docs judged grade 0 or unjudged.

    Raises when a query cannot supply enough candidates.
    """
    if n_distractors < 0:
        raise ValueError("n_distractors must be >= 0")
    out: DistractorSet = {}
    for qid in sorted(fused):
        judged = qrels.get(qid, {})
        picks = [doc for doc, _ in fused[qid] if judged.get(doc, 0) == 0]
        if len(picks) < n_distractors:
            raise ValueError(
                f"query {qid}: only {len(picks)} distractor candidates"
            )
        out[qid] = picks[:n_distractors]
    return out


def assemble(
    qrels: Qrels,
    distractors: DistractorSet,
    universe: list[str],
    sizes: list[int],
    seed: int = 0,
    k_rrf: int = DEFAULT_K_RRF,
) -> CorpusManifest:
    """Build nested corpora around the mandatory set.

    Mandatory = every relevant doc (grade >= 1) plus every distractor. The
    remainder of each corpus is a prefix of one seeded shuffle of the
    non-mandatory universe, which makes the sizes nested by construction.
    """
    sizes = sorted(sizes)
    if not sizes:
        raise ValueError("sizes must be non-empty")
    relevant = {d for docs in qrels.values() for d, g in docs.items() if g >= 1}
    distractor_docs = {d for docs in distractors.values() for d in docs}
    mandatory = relevant | distractor_docs
    universe_set = set(universe)
    if len(universe_set) != len(universe):
        raise ValueError("universe contains duplicate ids")
    missing = mandatory - universe_set
    if missing:
        raise ValueError(
            f"{len(missing)} mandatory docs missing from universe, e.g. {sorted(missing)[:3]}"
        )
    if sizes[0] < len(mandatory):
        raise ValueError(
            f"smallest size {sizes[0]} is below the mandatory set ({len(mandatory)} docs)"
        )
    if sizes[-1] > len(universe_set):
        raise ValueError(
            f"largest size {sizes[-1]} exceeds the universe ({len(universe_set)} docs)"
        )
    pool = sorted(universe_set - mandatory)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pool))
    mandatory_sorted = sorted(mandatory)
    doc_ids: dict[int, list[str]] = {}
    for size in sizes:
        fill = size - len(mandatory)
        chosen = mandatory_sorted + [pool[i] for i in order[:fill]]
        doc_ids[size] = sorted(chosen)
    counts = {
        "universe": len(universe_set),
        "mandatory": len(mandatory),
        "relevant": len(relevant),
        "distractors": len(distractor_docs),
        "queries": len(distractors),
    }
    return CorpusManifest(
        sizes=sizes, seed=seed, doc_ids=doc_ids, counts=counts, nested=True, k_rrf=k_rrf
    )


def fused_to_ranked_lists(fused: FusedRanking) -> list[RankedList]:
    """Adapter for scoring fused rankings with the metrics module."""
    return [
        RankedList(qid, [(doc, score) for doc, score in rows])
        for qid, rows in sorted(fused.items())
    ]
