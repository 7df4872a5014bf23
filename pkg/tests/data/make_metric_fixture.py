"""Regenerate the 5-query metric fixture and its expected values.

Standalone oracle: computes Recall/NDCG/MRR from first principles with plain
Python arithmetic (fractions for rank math, floats only at the final log2
division). Deliberately imports nothing from the package under test.

Run from the repo root:  python3 tests/data/make_metric_fixture.py
"""

import json
import math
import os
from fractions import Fraction

HERE = os.path.dirname(os.path.abspath(__file__))

# query -> {doc: grade}
QRELS = {
    "q1": {"d1": 3, "d2": 2, "d3": 0, "d4": 1},
    "q2": {"a1": 1, "a2": 1},
    "q3": {"b1": 2},
    "q4": {"c1": 0, "c2": 0},  # judged but nothing relevant
    "q5": {"e1": 1, "e2": 3, "e3": 2, "e4": 0, "e5": 1},
}

# query -> retrieved ranking (doc ids, best first); xN are unjudged
RANKINGS = {
    "q1": ["d1", "d3", "d2", "x1", "d4", "x2", "x3", "x4"],
    "q2": ["x1", "a2", "x2", "x3", "a1", "x4", "x5", "x6"],
    "q3": ["x1", "x2", "x3", "x4", "b1", "x5", "x6", "x7"],
    "q4": ["c1", "x1", "c2", "x2", "x3", "x4", "x5", "x6"],
    "q5": ["e2", "x1", "e4", "e3", "x2", "e1", "x3", "e5"],
}

KS = [3, 10]
MIN_GRADE = 1


def recall(ranking, judged, k):
    rel = {d for d, g in judged.items() if g >= MIN_GRADE}
    if not rel:
        return None
    hits = sum(1 for d in ranking[:k] if d in rel)
    return float(Fraction(hits, len(rel)))


def dcg(grades):
    return sum(g / math.log2(i + 1) for i, g in enumerate(grades, start=1))


def ndcg(ranking, judged, k):
    got = [judged.get(d, 0) for d in ranking[:k]]
    ideal = sorted(judged.values(), reverse=True)[:k]
    denom = dcg(ideal)
    if denom == 0.0:
        return 0.0
    return dcg(got) / denom


def mrr(ranking, judged, k):
    rel = {d for d, g in judged.items() if g >= MIN_GRADE}
    if not rel:
        return None
    for i, d in enumerate(ranking[:k], start=1):
        if d in rel:
            return float(Fraction(1, i))
    return 0.0


def main():
    per_query = {}
    for qid in sorted(QRELS):
        row = {}
        for k in KS:
            n = ndcg(RANKINGS[qid], QRELS[qid], k)
            row[f"ndcg@{k}"] = n
            r = recall(RANKINGS[qid], QRELS[qid], k)
            m = mrr(RANKINGS[qid], QRELS[qid], k)
            if r is not None:
                row[f"recall@{k}"] = r
            if m is not None:
                row[f"mrr@{k}"] = m
        per_query[qid] = row

    keys = sorted({m for row in per_query.values() for m in row})
    aggregate = {}
    for key in keys:
        vals = [per_query[q][key] for q in sorted(per_query) if key in per_query[q]]
        aggregate[key] = sum(vals) / len(vals)

    fixture = {"qrels": QRELS, "rankings": RANKINGS, "ks": KS, "min_grade": MIN_GRADE}
    expected = {"per_query": per_query, "aggregate": aggregate}
    with open(os.path.join(HERE, "metric_fixture.json"), "w") as f:
        json.dump(fixture, f, indent=1, sort_keys=True)
    with open(os.path.join(HERE, "metric_fixture_expected.json"), "w") as f:
        json.dump(expected, f, indent=1, sort_keys=True)
    print("wrote metric_fixture.json / metric_fixture_expected.json")


if __name__ == "__main__":
    main()
