"""Seeded k-means over flat vectors with L2 distance.

Lloyd iterations from a kmeans++ initialization. Everything is deterministic
given the seed: ties break to the lowest index, empty clusters are reseeded
with the point farthest from its assigned center, and center updates run in
a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


@dataclass
class KMeansResult:
    centers: np.ndarray       # (k, D)
    assignments: np.ndarray   # (N,) int
    inertia: float            # sum of squared distances to assigned centers
    n_iters: int
    inertia_history: list[float]


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared L2 distances, (N, k). Clamped at zero against rounding."""
    d = (points * points).sum(axis=1)[:, None] \
        + (centers * centers).sum(axis=1)[None, :] \
        - 2.0 * points @ centers.T
    return np.maximum(d, 0.0)


def _init_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=points.dtype)
    centers[0] = points[rng.integers(n)]
    closest = _sq_dists(points, centers[:1]).ravel()
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            centers[i] = points[rng.integers(n)]
        else:
            centers[i] = points[rng.choice(n, p=closest / total)]
        closest = np.minimum(closest, _sq_dists(points, centers[i:i + 1]).ravel())
    return centers


def _repair_empty(points: np.ndarray, centers: np.ndarray,
                  assignments: np.ndarray, d: np.ndarray) -> None:
    """Seed every empty cluster with the point farthest from its center.

    Mutates centers/assignments/d in place. Donors come from clusters with
    more than one member whenever any exist, so a repair cannot re-empty a
    previously repaired cluster.
    """
    n, k = d.shape
    rows = np.arange(n)
    for c in range(k):
        if (assignments == c).any():
            continue
        dist = d[rows, assignments]
        counts = np.bincount(assignments, minlength=k)
        eligible = counts[assignments] > 1
        if eligible.any():
            cand = np.flatnonzero(eligible)
            farthest = int(cand[dist[cand].argmax()])
        else:
            farthest = int(dist.argmax())
        centers[c] = points[farthest]
        col = ((points - centers[c]) ** 2).sum(axis=1)
        d[:, c] = col
        closer = col < dist
        assignments[closer] = c
        assignments[farthest] = c


def kmeans_fit(points: np.ndarray, k: int, seed: int = 0,
               max_iters: int = 100, tol: float = 1e-6) -> KMeansResult:
    """Cluster N x D points into k groups with seeded kmeans++ / Lloyd.

    Stops when the relative center shift drops below ``tol`` or after
    ``max_iters`` iterations. Returned assignments map each point to its
    nearest returned center (ties to the lowest index) and no cluster is
    empty.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise InvalidInput(f"expected (N, D) points, got shape {points.shape}")
    if not np.isfinite(points).all():
        raise InvalidInput("points contain non-finite values")
    n = points.shape[0]
    if k < 1 or n < k:
        raise InvalidInput(f"need 1 <= k <= N, got k={k}, N={n}")

    rng = np.random.default_rng(seed)
    centers = _init_plusplus(points, k, rng)
    rows = np.arange(n)

    history: list[float] = []
    assignments = np.zeros(n, dtype=np.intp)
    n_iters = 0
    for iteration in range(max_iters):
        n_iters = iteration + 1
        d = _sq_dists(points, centers)
        assignments = d.argmin(axis=1)
        _repair_empty(points, centers, assignments, d)
        inertia = float(d[rows, assignments].sum())
        if __debug__ and history:
            assert inertia <= history[-1] + 1e-9 * max(1.0, history[-1]), \
                "k-means inertia increased across an iteration"
        history.append(inertia)

        new_centers = np.empty_like(centers)
        for c in range(k):
            new_centers[c] = points[assignments == c].mean(axis=0)
        shift = np.linalg.norm(new_centers - centers)
        scale = max(np.linalg.norm(centers), 1e-12)
        centers = new_centers
        if shift / scale < tol:
            break

    # final assignment against the returned centers
    d = _sq_dists(points, centers)
    assignments = d.argmin(axis=1)
    _repair_empty(points, centers, assignments, d)
    inertia = float(d[rows, assignments].sum())
    history.append(inertia)
    return KMeansResult(centers, assignments, inertia, n_iters, history)


def kmeans_assign(point: np.ndarray, centers: np.ndarray) -> int:
    """Index of the nearest center under L2, ties to the lowest index."""
    point = np.asarray(point, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if point.ndim != 1 or centers.ndim != 2 or centers.shape[1] != point.shape[0]:
        raise InvalidInput(
            f"dimension mismatch: point {point.shape} vs centers {centers.shape}")
    d = ((centers - point) ** 2).sum(axis=1)
    return int(d.argmin())
