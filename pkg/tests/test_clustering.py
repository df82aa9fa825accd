import numpy as np
import pytest

from skelaug import InvalidInput, kmeans_assign, kmeans_fit


def two_blobs(n=200, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(loc=(-4.0, 0.0), scale=0.3, size=(n, 2))
    b = rng.normal(loc=(4.0, 1.0), scale=0.3, size=(n, 2))
    return a, b


class TestKMeansFit:
    def test_k1_center_is_mean(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(50, 4))
        result = kmeans_fit(pts, k=1, seed=0)
        np.testing.assert_allclose(result.centers[0], pts.mean(axis=0), atol=1e-12)

    def test_two_blob_recovery(self):
        a, b = two_blobs()
        pts = np.concatenate([a, b])
        result = kmeans_fit(pts, k=2, seed=0)
        means = np.stack([a.mean(axis=0), b.mean(axis=0)])
        # match centers to blob means by proximity
        d = np.linalg.norm(result.centers[:, None] - means[None], axis=2)
        order = d.argmin(axis=1)
        assert set(order) == {0, 1}
        for c, m in zip(result.centers, means[order]):
            assert np.linalg.norm(c - m) < 0.1

    def test_determinism_bitwise(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(120, 6))
        r1 = kmeans_fit(pts, k=5, seed=77)
        r2 = kmeans_fit(pts, k=5, seed=77)
        assert r1.centers.tobytes() == r2.centers.tobytes()
        np.testing.assert_array_equal(r1.assignments, r2.assignments)
        assert r1.inertia == r2.inertia

    def test_inertia_monotone(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(300, 8))
        result = kmeans_fit(pts, k=7, seed=1)
        hist = np.asarray(result.inertia_history)
        assert (np.diff(hist) <= 1e-9 * np.maximum(1.0, hist[:-1])).all()

    def test_reassignment_is_stable(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(90, 3))
        result = kmeans_fit(pts, k=4, seed=2)
        for i, p in enumerate(pts):
            assert kmeans_assign(p, result.centers) == result.assignments[i]

    def test_no_empty_clusters(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(30, 2))
        result = kmeans_fit(pts, k=10, seed=3)
        assert set(result.assignments.tolist()) == set(range(10))

    def test_degenerate_identical_points(self):
        pts = np.ones((6, 3))
        result = kmeans_fit(pts, k=2, seed=0)
        assert set(result.assignments.tolist()) == {0, 1}
        assert result.inertia == 0.0

    def test_fewer_points_than_k(self):
        with pytest.raises(InvalidInput):
            kmeans_fit(np.zeros((2, 3)), k=3)

    def test_non_finite_rejected(self):
        pts = np.zeros((5, 2))
        pts[0, 0] = np.inf
        with pytest.raises(InvalidInput):
            kmeans_fit(pts, k=2)


class TestKMeansAssign:
    def test_exact_center_match(self):
        centers = np.arange(20.0).reshape(5, 4)
        assert kmeans_assign(centers[3], centers) == 3

    def test_tie_breaks_to_lowest_index(self):
        centers = np.array([[0.0], [1.0]])
        assert kmeans_assign(np.array([0.5]), centers) == 0

    def test_matches_brute_force_scan(self):
        rng = np.random.default_rng(6)
        centers = rng.normal(size=(9, 5))
        for _ in range(50):
            p = rng.normal(size=5)
            best, best_d = 0, np.inf
            for i, c in enumerate(centers):
                d = float(((p - c) ** 2).sum())
                if d < best_d:
                    best, best_d = i, d
            assert kmeans_assign(p, centers) == best

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            kmeans_assign(np.zeros(3), np.zeros((2, 4)))
