"""Clustering of normalized (len, inc) points: norm-sorted aggregation and seeded k-means."""
import logging
from typing import Tuple

import numpy as np

from src.errors import EmptyInputError, InvalidParamsError

logger = logging.getLogger(__name__)

KMEANS_MAX_ITER = 300


def sorting_based(points: np.ndarray, ct: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Greedy aggregation over points sorted by 2-norm.

    The first unassigned point in norm order seeds a group; every later unassigned
    point within distance ct of the seed joins it. Since |p - q| >= | |p| - |q| |,
    the scan stops once the norm gap to the seed exceeds ct.

    Args:
        points: (n, 2) array in normalized space
        ct: aggregation radius, > 0

    Returns:
        (labels, centers): labels[i] is the group of points[i] in creation order,
        centers the componentwise mean of each group
    """
    if ct <= 0:
        raise InvalidParamsError(f"ct must be > 0, got {ct!r}")
    n = points.shape[0]
    if n == 0:
        raise EmptyInputError("no points to cluster")

    norms = np.linalg.norm(points, axis=1)
    order = np.argsort(norms, kind="stable")
    sorted_norms = norms[order]
    labels = np.full(n, -1, dtype=np.int64)
    centers = []

    for pos in range(n):
        seed_idx = order[pos]
        if labels[seed_idx] >= 0:
            continue
        group = len(centers)
        labels[seed_idx] = group
        stop = np.searchsorted(sorted_norms, sorted_norms[pos] + ct, side="right")
        cand = order[pos + 1:stop]
        if cand.size:
            cand = cand[labels[cand] < 0]
            dist = np.linalg.norm(points[cand] - points[seed_idx], axis=1)
            labels[cand[dist <= ct]] = group
        centers.append(points[labels == group].mean(axis=0))

    return labels, np.array(centers, dtype=np.float64).reshape(-1, 2)


def _nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin keeps the lowest index on ties
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def farthest_point_init(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    """First center drawn with PCG64(seed); each next one is the point farthest from those chosen."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    chosen = [int(rng.integers(points.shape[0]))]
    min_d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(min_d2))
        if min_d2[nxt] == 0:
            break
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((points - points[nxt]) ** 2).sum(axis=1))
    return points[chosen].copy()


def k_means(points: np.ndarray, csize: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lloyd iterations with k = min(csize, number of distinct points).

    Stops when assignments no longer change or after KMEANS_MAX_ITER rounds. A
    cluster left empty keeps its previous center and is dropped at the end.

    Returns:
        (labels, centers) with labels indexing the returned centers
    """
    if csize < 1:
        raise InvalidParamsError(f"csize must be >= 1, got {csize!r}")
    if points.shape[0] == 0:
        raise EmptyInputError("no points to cluster")

    distinct = np.unique(points, axis=0).shape[0]
    k = min(int(csize), distinct)
    centers = farthest_point_init(points, k, seed)
    labels = _nearest(points, centers)

    for it in range(KMEANS_MAX_ITER):
        for c in range(centers.shape[0]):
            members = labels == c
            if members.any():
                centers[c] = points[members].mean(axis=0)
        new_labels = _nearest(points, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    else:
        logger.warning("k-means did not converge within %d iterations", KMEANS_MAX_ITER)

    used = np.unique(labels)
    if used.size < centers.shape[0]:
        logger.warning("k-means dropped %d empty cluster(s)", centers.shape[0] - used.size)
        remap = np.full(centers.shape[0], -1, dtype=np.int64)
        remap[used] = np.arange(used.size)
        labels, centers = remap[labels], centers[used]
    return labels, centers
