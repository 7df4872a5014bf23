"""Lloyd's k-means with seeded deterministic initialization.

Initialization samples k distinct input points (fewer distinct points than k
cycles through the distinct set). Assignment ties go to the lowest centroid
index; empty clusters are repaired by moving the farthest point out of the
largest cluster. Runs single-threaded and is reproducible for a given seed.
"""

import numpy as np

_ASSIGN_CHUNK = 8192


def _nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid per point (L2, ties -> lowest index)."""
    n = points.shape[0]
    out = np.empty(n, dtype=np.int64)
    c_sq = (centroids * centroids).sum(axis=1)
    for start in range(0, n, _ASSIGN_CHUNK):
        chunk = points[start : start + _ASSIGN_CHUNK]
        d2 = c_sq[None, :] - 2.0 * (chunk @ centroids.T)
        out[start : start + _ASSIGN_CHUNK] = np.argmin(d2, axis=1)
    return out


def _inertia(points: np.ndarray, centroids: np.ndarray, assign: np.ndarray) -> float:
    diff = points - centroids[assign]
    return float((diff * diff).sum())


def _repair_empties(
    points: np.ndarray, centroids: np.ndarray, assign: np.ndarray, k: int
) -> None:
    """Move the farthest member of the largest cluster into each empty cluster."""
    while True:
        sizes = np.bincount(assign, minlength=k)
        empties = np.flatnonzero(sizes == 0)
        if len(empties) == 0:
            return
        target = int(empties[0])
        donor = int(np.argmax(sizes))
        members = np.flatnonzero(assign == donor)
        diff = points[members] - centroids[donor]
        far = members[int(np.argmax((diff * diff).sum(axis=1)))]
        assign[far] = target
        centroids[target] = points[far]


def kmeans(
    points: np.ndarray,
    k: int,
    iters: int = 25,
    seed: int = 0,
    inertia_trace: list | None = None,
) -> np.ndarray:
    """Cluster ``points`` (n, d) into ``k`` centroids.

    Stops after ``iters`` iterations or earlier when assignments stop
    changing. When ``inertia_trace`` is a list, the post-update inertia of
    each iteration is appended to it (non-increasing by construction).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be 2-D")
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k ({k}) exceeds point count ({n})")

    rng = np.random.default_rng(seed)
    distinct = np.unique(points, axis=0)
    if len(distinct) >= k:
        pick = rng.choice(len(distinct), size=k, replace=False)
        centroids = distinct[pick].copy()
    else:
        reps = -(-k // len(distinct))  # ceil
        pool = np.tile(np.arange(len(distinct)), reps)[:k]
        centroids = distinct[rng.permutation(pool)].copy()

    prev: np.ndarray | None = None
    for _ in range(iters):
        assign = _nearest(points, centroids)
        _repair_empties(points, centroids, assign, k)
        if prev is not None and np.array_equal(assign, prev):
            break
        for c in range(k):
            members = assign == c
            centroids[c] = points[members].mean(axis=0)
        if inertia_trace is not None:
            inertia_trace.append(_inertia(points, centroids, assign))
        prev = assign
    return centroids
