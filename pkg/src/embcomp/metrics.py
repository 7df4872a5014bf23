"""Graded-relevance retrieval metrics: Recall@k, NDCG@k, MRR@k.

Definitions over a ranking r_1, r_2, ... and graded judgments:

    Recall@k = |{relevant} ∩ {r_1..r_k}| / |{relevant}|,  relevant = grade >= min_grade
    DCG@k    = sum_{i<=k} gain(grade(r_i)) / log2(i + 1)
    NDCG@k   = DCG@k / IDCG@k  (ideal ranking of *all* judged docs; 0 when IDCG is 0)
    MRR@k    = 1 / rank of first relevant hit within top k, else 0

Gain is linear (the grade itself, default) or exponential (2**grade - 1);
unjudged docs contribute zero gain. Aggregates are plain means over queries
in sorted-id order.
"""

import math
from dataclasses import dataclass, field

Qrels = dict[str, dict[str, int]]


@dataclass
class MetricReport:
    per_query: dict[str, dict[str, float]]
    aggregate: dict[str, float]
    unjudged: list[str] = field(default_factory=list)  # run queries missing from qrels
    no_relevant: list[str] = field(default_factory=list)  # judged but nothing >= min_grade


def parse_qrels(path: str) -> Qrels:
    """Read TREC qrels: ``qid 0 docid grade``; ``#`` starts a comment."""
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
            qid, _, doc, grade_s = parts
            try:
                grade = int(grade_s)
            except ValueError:
                raise ValueError(f"line {lineno}: grade {grade_s!r} is not an integer")
            if grade < 0:
                raise ValueError(f"line {lineno}: negative grade {grade}")
            qrels.setdefault(qid, {})[doc] = grade
    return qrels


def _gain(grade: int, gain: str) -> float:
    if gain == "linear":
        return float(grade)
    if gain == "exponential":
        return float(2**grade - 1)
    raise ValueError(f"unknown gain {gain!r}")


def recall_at_k(ranking: list[str], judged: dict[str, int], k: int, min_grade: int = 1) -> float:
    relevant = {d for d, g in judged.items() if g >= min_grade}
    if not relevant:
        raise ValueError("recall undefined: no docs at or above min_grade")
    hits = sum(1 for d in ranking[:k] if d in relevant)
    return hits / len(relevant)


def ndcg_at_k(ranking: list[str], judged: dict[str, int], k: int, gain: str = "linear") -> float:
    dcg = 0.0
    for i, doc in enumerate(ranking[:k], start=1):
        g = judged.get(doc)
        if g:
            dcg += _gain(g, gain) / math.log2(i + 1)
    ideal = sorted(judged.values(), reverse=True)[:k]
    idcg = sum(_gain(g, gain) / math.log2(i + 1) for i, g in enumerate(ideal, start=1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def mrr_at_k(ranking: list[str], judged: dict[str, int], k: int, min_grade: int = 1) -> float:
    for i, doc in enumerate(ranking[:k], start=1):
        if judged.get(doc, 0) >= min_grade:
            return 1.0 / i
    return 0.0


def evaluate(
    run,
    qrels: Qrels,
    ks: list[int],
    gain: str = "linear",
    min_grade: int = 1,
) -> MetricReport:
    """Score a run (list of RankedList) against qrels at every cutoff in ks.

    Metric keys look like ``recall@100``. Queries absent from the qrels are
    skipped and listed in ``unjudged``; queries with no doc at or above
    ``min_grade`` contribute NDCG only (recall is undefined there) and are
    listed in ``no_relevant``. Aggregates are means over contributing
    queries, computed in sorted query-id order.
    """
    if not ks or any(k < 1 for k in ks):
        raise ValueError("ks must be non-empty positive cutoffs")
    seen: set[str] = set()
    for rl in run:
        if rl.query_id in seen:
            raise ValueError(f"duplicate query {rl.query_id!r} in run")
        seen.add(rl.query_id)
    judged_lists = {rl.query_id: [d for d, _ in rl.entries] for rl in run if rl.query_id in qrels}
    unjudged = sorted(q for q in seen if q not in qrels)
    if not judged_lists:
        raise ValueError("no overlap between run queries and qrels")

    per_query: dict[str, dict[str, float]] = {}
    no_relevant: list[str] = []
    for qid in sorted(judged_lists):
        judged = qrels[qid]
        ranking = judged_lists[qid]
        has_relevant = any(g >= min_grade for g in judged.values())
        row: dict[str, float] = {}
        for k in sorted(ks):
            row[f"ndcg@{k}"] = ndcg_at_k(ranking, judged, k, gain)
            if has_relevant:
                row[f"recall@{k}"] = recall_at_k(ranking, judged, k, min_grade)
                row[f"mrr@{k}"] = mrr_at_k(ranking, judged, k, min_grade)
        if not has_relevant:
            no_relevant.append(qid)
        per_query[qid] = row

    aggregate: dict[str, float] = {}
    keys = sorted({m for row in per_query.values() for m in row})
    for key in keys:
        vals = [per_query[q][key] for q in sorted(per_query) if key in per_query[q]]
        aggregate[key] = sum(vals) / len(vals)
    return MetricReport(per_query, aggregate, unjudged, no_relevant)
