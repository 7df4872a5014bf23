"""One-sided Wilcoxon signed-rank test for paired per-query metrics.

Protocol: differences d = variant - baseline; zeros are dropped before
ranking (and flagged in serialized output); |d| receives average ranks; W is
the sum of ranks of positive differences. With n <= EXACT_N effective pairs
and no tied |d|, the p-value comes from the exact null distribution (dynamic
program over all sign assignments); otherwise from a normal approximation
with tie-corrected variance

    var = n(n+1)(2n+1)/24 - sum(t^3 - t)/48

and a 0.5 continuity correction. ``alternative="variant_less"`` asks whether
the variant is worse than the baseline (small W is extreme).
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

EXACT_N = 25
ALTERNATIVES = ("variant_less", "variant_greater")


@dataclass
class PairedSample:
    query_ids: list[str]
    baseline: list[float]
    variant: list[float]

    def __post_init__(self):
        if not (len(self.query_ids) == len(self.baseline) == len(self.variant)):
            raise ValueError("query_ids, baseline, variant must align")


@dataclass
class TestResult:
    statistic: float  # W: rank sum of positive differences
    n_effective: int
    p_value: float
    method: str  # "exact" | "normal_approx"
    significant: bool
    alpha: float

    def to_dict(self) -> dict:
        return {
            "W": self.statistic,
            "n": self.n_effective,
            "p": self.p_value,
            "method": self.method,
            "significant": self.significant,
            "alpha": self.alpha,
            "zero_method": "drop",
        }


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def _exact_cdf_counts(n: int) -> np.ndarray:
    """counts[s] = number of sign assignments with positive-rank sum s."""
    total = n * (n + 1) // 2
    ways = np.zeros(total + 1, dtype=np.float64)
    ways[0] = 1.0
    for r in range(1, n + 1):
        ways[r:] += ways[:-r].copy()
    return ways


def _exact_p(w: float, n: int, alternative: str) -> float:
    ways = _exact_cdf_counts(n)
    denom = 2.0**n
    if alternative == "variant_less":
        return float(ways[: int(math.floor(w + 1e-12)) + 1].sum() / denom)
    lo = int(math.ceil(w - 1e-12))  # first integer sum >= w
    return float(ways[lo:].sum() / denom)


def _normal_p(w: float, n: int, ranks_abs: np.ndarray, alternative: str) -> float:
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks_abs, return_counts=True)
    var -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    if var <= 0:
        return 1.0
    sd = math.sqrt(var)
    if alternative == "variant_less":
        z = (w - mean + 0.5) / sd
        p = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
    else:
        z = (w - mean - 0.5) / sd
        p = 0.5 * (1.0 - math.erf(z / math.sqrt(2.0)))
    return min(max(p, 0.0), 1.0)


def wilcoxon_one_sided(
    sample: PairedSample,
    alternative: str = "variant_less",
    alpha: float = 0.05,
    method: str = "auto",
) -> TestResult:
    """Test paired differences; see module docstring for the exact protocol.

    ``method`` is "auto" (exact when n <= 25 with untied |d|), "exact", or
    "normal_approx". Zero effective pairs yields the no-evidence result
    (p = 1.0, not significant).
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}")
    if method not in ("auto", "exact", "normal_approx"):
        raise ValueError(f"unknown method {method!r}")
    d = np.asarray(sample.variant, dtype=np.float64) - np.asarray(
        sample.baseline, dtype=np.float64
    )
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        return TestResult(0.0, 0, 1.0, "exact", False, alpha)

    mags = np.abs(d)
    ranks = _average_ranks(mags)
    w = float(ranks[d > 0].sum())

    untied = len(np.unique(mags)) == n
    use_exact = method == "exact" or (method == "auto" and n <= EXACT_N and untied)
    if method == "exact" and not untied:
        raise ValueError("exact method requires untied |differences|")
    if use_exact:
        p = _exact_p(w, n, alternative)
        used = "exact"
    else:
        p = _normal_p(w, n, ranks, alternative)
        used = "normal_approx"
    p = min(p, 1.0)
    return TestResult(w, n, p, used, p <= alpha, alpha)


def annotate_significance(
    reports: dict[str, "object"],
    baseline_key: str,
    metric: str,
    alpha: float = 0.05,
    alternative: str = "variant_less",
) -> dict[str, TestResult]:
    """Test every variant report against the baseline on one metric.

    ``reports`` maps label -> MetricReport. All reports must cover the same
    query set for ``metric``. The baseline is excluded from the output.
    """
    if baseline_key not in reports:
        raise KeyError(f"baseline {baseline_key!r} not in reports")
    base = reports[baseline_key]
    base_vals = {
        q: row[metric] for q, row in base.per_query.items() if metric in row
    }
    if not base_vals:
        raise ValueError(f"baseline has no values for metric {metric!r}")
    out: dict[str, TestResult] = {}
    for key in sorted(reports):
        if key == baseline_key:
            continue
        rep = reports[key]
        vals = {q: row[metric] for q, row in rep.per_query.items() if metric in row}
        if set(vals) != set(base_vals):
            missing = sorted(set(base_vals) ^ set(vals))
            raise ValueError(f"query-set mismatch for {key!r}: {missing}")
        qids = sorted(base_vals)
        sample = PairedSample(
            qids, [base_vals[q] for q in qids], [vals[q] for q in qids]
        )
        out[key] = wilcoxon_one_sided(sample, alternative=alternative, alpha=alpha)
    return out
