import itertools

import numpy as np
import pytest

from embcomp.codecs.kmeans import kmeans


def brute_force_best_2partition(points):
    """Oracle: best 2-cluster split by exhaustive enumeration."""
    best = (np.inf, None)
    idx = range(len(points))
    for size in range(1, len(points)):
        for left in itertools.combinations(idx, size):
            right = [i for i in idx if i not in left]
            a, b = points[list(left)], points[right]
            cost = ((a - a.mean(0)) ** 2).sum() + ((b - b.mean(0)) ** 2).sum()
            if cost < best[0]:
                best = (cost, (a.mean(0), b.mean(0)))
    return best


def test_two_cluster_example_matches_exhaustive_oracle():
    points = np.array([[0.0], [1.0], [10.0], [11.0]])
    got = np.sort(kmeans(points, 2, seed=0).ravel())
    cost, (m1, m2) = brute_force_best_2partition(points)
    want = np.sort(np.array([m1[0], m2[0]]))
    assert np.allclose(got, want)
    assert np.allclose(got, [0.5, 10.5])


def test_deterministic_for_seed(rng):
    points = rng.standard_normal((200, 4))
    a = kmeans(points, 8, seed=42)
    b = kmeans(points, 8, seed=42)
    assert np.array_equal(a, b)


def test_k_above_count_rejected():
    with pytest.raises(ValueError, match="exceeds point count"):
        kmeans(np.zeros((3, 2)), 4)


def test_k_equals_distinct_points_gives_zero_inertia():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])
    trace: list = []
    centroids = kmeans(points, 4, seed=1, inertia_trace=trace)
    assert trace[-1] == 0.0
    got = {tuple(c) for c in centroids}
    want = {tuple(p) for p in points}
    assert got == want


def test_duplicate_points_fewer_distinct_than_k():
    points = np.array([[0.0], [0.0], [0.0], [5.0]])
    centroids = kmeans(points, 3, seed=0)
    assert centroids.shape == (3, 1)
    assert np.isfinite(centroids).all()
    # every distinct value appears as a centroid
    assert {0.0, 5.0} <= {round(float(c), 9) for c in centroids.ravel()}


def test_inertia_non_increasing_on_seeded_problems():
    master = np.random.default_rng(99)
    for trial in range(100):
        n = int(master.integers(8, 60))
        d = int(master.integers(1, 5))
        k = int(master.integers(1, min(n, 8) + 1))
        points = master.standard_normal((n, d))
        trace: list = []
        kmeans(points, k, iters=25, seed=int(master.integers(0, 2**31)), inertia_trace=trace)
        assert len(trace) >= 1
        for a, b in zip(trace, trace[1:]):
            assert b <= a + 1e-9


def test_converges_early_on_separated_data(rng):
    blob1 = rng.standard_normal((50, 3)) * 0.01
    blob2 = rng.standard_normal((50, 3)) * 0.01 + 100.0
    points = np.vstack([blob1, blob2])
    trace: list = []
    centroids = kmeans(points, 2, iters=25, seed=7, inertia_trace=trace)
    assert len(trace) < 25  # assignment stabilizes quickly
    means = np.sort(centroids[:, 0])
    assert abs(means[0] - blob1[:, 0].mean()) < 0.01
    assert abs(means[1] - blob2[:, 0].mean()) < 0.01
