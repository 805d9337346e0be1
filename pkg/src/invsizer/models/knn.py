"""Exact brute-force k-nearest-neighbour regression.

Squared Euclidean distances are accumulated one input column at a time, in
column order, so the arithmetic is reproducible by a plain Python loop.
Neighbours are ranked by (distance, training-row index) and their targets
summed in that rank order before dividing by k.
"""
from __future__ import annotations

import numpy as np

#: distances for this many (query, train) pairs are held in memory at once
PAIR_BUDGET = 8_000_000


def squared_distances(queries: np.ndarray, train: np.ndarray) -> np.ndarray:
    d2 = np.zeros((queries.shape[0], train.shape[0]))
    tmp = np.empty_like(d2)
    for j in range(train.shape[1]):
        np.subtract(queries[:, j, None], train[None, :, j], out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        d2 += tmp
    return d2


def neighbour_indices(queries: np.ndarray, train: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest training rows per query, nearest first."""
    n = train.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    out = np.empty((queries.shape[0], k), dtype=np.int64)
    chunk = max(1, PAIR_BUDGET // max(n, 1))
    for lo in range(0, queries.shape[0], chunk):
        d2 = squared_distances(queries[lo:lo + chunk], train)
        if k < n:
            part = np.argpartition(d2, k - 1, axis=1)[:, :k]
            kth = np.take_along_axis(d2, part, axis=1).max(axis=1)
        else:
            kth = d2.max(axis=1)
        for r in range(d2.shape[0]):
            cand = np.flatnonzero(d2[r] <= kth[r])
            order = np.lexsort((cand, d2[r, cand]))
            out[lo + r] = cand[order[:k]]
    return out


class KNNRegressor:
    def __init__(self, k: int = 5):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = int(k)
        self.x: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "KNNRegressor":
        if len(x) < self.k:
            raise ValueError(f"k={self.k} exceeds the {len(x)} training rows")
        self.x = np.array(x, dtype=np.float64, copy=True)
        self.y = np.array(y, dtype=np.float64, copy=True)
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        nb = neighbour_indices(np.asarray(x, dtype=np.float64), self.x, self.k)
        acc = self.y[nb[:, 0]].copy()
        for j in range(1, self.k):
            acc += self.y[nb[:, j]]
        return acc / self.k

    def state(self) -> tuple[dict, dict]:
        return {"k": self.k}, {"x": self.x, "y": self.y}

    @classmethod
    def from_state(cls, meta: dict, arrays: dict) -> "KNNRegressor":
        m = cls(meta["k"])
        m.x, m.y = arrays["x"], arrays["y"]
        return m
