"""Seeded k-means for the handful of dimensions item parameters live in."""

from __future__ import annotations

import numpy as np


def _plus_plus(x, k, rng):
    centers = [x[rng.integers(len(x))]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(x))
        else:
            idx = rng.choice(len(x), p=d2 / total)
        centers.append(x[idx])
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers)


def _lloyd(x, centers, max_iter):
    labels = np.zeros(len(x), dtype=np.int64)
    for it in range(max_iter):
        dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist.argmin(axis=1)
        if it and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(len(centers)):
            members = x[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                # empty cluster: move it onto the point farthest from its center
                far = dist[np.arange(len(x)), labels].argmax()
                centers[j] = x[far]
                labels[far] = j
    inertia = float(((x - centers[labels]) ** 2).sum())
    return labels, centers, inertia


def kmeans(x, k: int, n_init: int = 10, max_iter: int = 300, seed=None):
    """Cluster the rows of ``x`` into ``k`` groups.

    Runs ``n_init`` k-means++ restarts and keeps the one with the smallest
    within-cluster sum of squares. Returns ``(labels, centers)``.
    """
    x = np.asarray(x, dtype=float)
    if not 1 <= k <= len(x):
        raise ValueError(f"need 1 <= k <= {len(x)} points, got k={k}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, centers, inertia = _lloyd(x, _plus_plus(x, k, rng), max_iter)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    return best[0], best[1]
