"""kmeans++ seeding and Lloyd iterations over the rows of a real matrix.

Restarts are driven by independent derived streams keyed on (root, r),
so a restart's outcome does not depend on how many other restarts ran
before it or on execution order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError
from .rng import derive_rng

# Relative slack when checking that the objective never increases.
_MONOTONE_RTOL = 1e-12


@dataclass
class KMeansParams:
    restarts: int = 10
    max_iter: int = 100


@dataclass
class KMeansResult:
    """Labels, centers, and the within-cluster sum of squares they induce."""

    labels: np.ndarray
    centers: np.ndarray
    objective: float
    iterations: int
    restart_index: int


def seed_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k rows as initial centers with D^2 (kmeans++) sampling.

    The first center is uniform over rows; each later one is sampled with
    probability proportional to its squared distance to the nearest chosen
    center. If every remaining distance is zero the draw falls back to
    uniform over rows not yet chosen.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k > n:
        raise DimensionError(f"cannot seed {k} centers from {n} points")
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            remaining = np.setdiff1d(np.arange(n), chosen[:i])
            idx = remaining[rng.integers(remaining.size)]
        chosen[i] = idx
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _assign(points, centers):
    # squared Euclidean distances via the expansion; argmin takes the
    # lowest center index on ties
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.argmin(d2, axis=1)


def _objective(points, labels, centers):
    diff = points - centers[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _update_centers(points, labels, k, prev_centers):
    """Means of the assigned rows; empty clusters are re-seeded at the point
    farthest from its own assigned center (points already used for a repair
    in this round are excluded)."""
    n, d = points.shape
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    onehot = (labels[None, :] == np.arange(k)[:, None]).astype(np.float64)
    sums = onehot @ points
    centers = np.where(counts[:, None] > 0, sums / np.maximum(counts, 1.0)[:, None], 0.0)
    empties = np.flatnonzero(counts == 0)
    if empties.size:
        if prev_centers is None:
            prev_centers = centers
        dist = np.sum((points - prev_centers[labels]) ** 2, axis=1)
        used: list[int] = []
        for a in empties:
            if used:
                dist[used] = -np.inf
            far = int(np.argmax(dist))
            centers[a] = points[far]
            used.append(far)
    return centers


def lloyd_from_labels(points, labels0, k=None, max_iter=100):
    """Alternate center updates and nearest-center reassignment from an
    initial labeling; stops early once an iteration changes no label.

    Returns ``(KMeansResult, trace)`` where trace holds the objective after
    every completed iteration.
    """
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels0, dtype=np.int64)
    if labels.shape[0] != points.shape[0]:
        raise DimensionError("labels0 length must match the number of rows")
    if k is None:
        k = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= k:
        raise DimensionError(f"labels0 must lie in [0, {k})")
    centers = _update_centers(points, labels, k, None)
    obj = _objective(points, labels, centers)
    trace = [obj]
    iterations = 0
    for _ in range(max_iter):
        centers = _update_centers(points, labels, k, centers)
        new_labels = _assign(points, centers)
        new_obj = _objective(points, new_labels, centers)
        if new_obj > obj + _MONOTONE_RTOL * max(1.0, abs(obj)):
            raise NumericalError("within-cluster SS increased during a Lloyd step")
        obj = new_obj
        trace.append(obj)
        iterations += 1
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    # degenerate duplicate-point inputs can leave a cluster empty at the
    # iteration cap; force one more repair pass so every cluster is populated
    repairs = 0
    while np.bincount(labels, minlength=k).min() == 0 and repairs <= k:
        centers = _update_centers(points, labels, k, centers)
        labels = _assign(points, centers)
        obj = _objective(points, labels, centers)
        repairs += 1
    if np.bincount(labels, minlength=k).min() == 0:
        counts = np.bincount(labels, minlength=k)
        for a in np.flatnonzero(counts == 0):
            donor = int(np.argmax(counts))
            take = int(np.flatnonzero(labels == donor)[-1])
            labels = labels.copy()
            labels[take] = a
            counts = np.bincount(labels, minlength=k)
        centers = _update_centers(points, labels, k, centers)
        obj = _objective(points, labels, centers)
    result = KMeansResult(
        labels=labels,
        centers=centers,
        objective=obj,
        iterations=iterations,
        restart_index=0,
    )
    return result, trace


def lloyd_run(
    points,
    init_centers=None,
    k=None,
    max_iter=100,
    restarts=1,
    rng=None,
) -> KMeansResult:
    """Best-of-restarts Lloyd iterations.

    Restart 0 starts from ``init_centers`` when given; every other restart
    draws fresh kmeans++ centers from its own derived stream. Ties in the
    final objective go to the lowest restart index.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if init_centers is not None:
        init_centers = np.asarray(init_centers, dtype=np.float64)
        if init_centers.shape[1] != points.shape[1]:
            raise DimensionError("init_centers dimension does not match points")
        k = init_centers.shape[0]
    if k is None:
        raise DimensionError("either init_centers or k must be given")
    if k > n:
        raise DimensionError(f"k={k} exceeds the number of points {n}")
    if max_iter < 1:
        raise DimensionError("max_iter must be at least 1")
    if restarts < 1:
        raise DimensionError("restarts must be at least 1")
    needs_rng = restarts > 1 or init_centers is None
    if needs_rng and rng is None:
        raise DimensionError("an rng is required when seeding centers")
    root = int(rng.integers(2**63)) if rng is not None else 0

    best = None
    for r in range(restarts):
        if r == 0 and init_centers is not None:
            centers0 = init_centers
        else:
            centers0 = seed_plus_plus(points, k, derive_rng(root, r))
        labels0 = _assign(points, centers0)
        result, _ = lloyd_from_labels(points, labels0, k=k, max_iter=max_iter)
        result.restart_index = r
        if best is None or result.objective < best.objective:
            best = result
    return best


def kmeans(points, k, params: KMeansParams | None = None, rng=None) -> KMeansResult:
    """kmeans++ seeded Lloyd clustering with restarts (the default driver)."""
    params = params or KMeansParams()
    return lloyd_run(
        points,
        init_centers=None,
        k=k,
        max_iter=params.max_iter,
        restarts=params.restarts,
        rng=rng,
    )
