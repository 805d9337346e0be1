"""Random forest of multi-output CART regression trees.

Trees are grown one depth level at a time: for every feature the samples of
all open nodes are sorted together by (node, value), so the best split of
every node comes out of a handful of vectorised cumulative sums. A split
minimises the summed squared error over all outputs; ties go to the lower
feature index, then to the lower threshold. A node becomes a leaf when it is
pure, when its inputs are all identical, or at ``max_depth``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray    # int64, LEAF for leaves
    threshold: np.ndarray  # go left when x[feature] <= threshold
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # (n_nodes, n_outputs) mean target of the node

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                d[self.left[i]] = d[self.right[i]] = d[i] + 1
        return int(d.max())

    def predict(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(len(x), dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            nd = node[active]
            go_left = x[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
            active = active[self.feature[node[active]] != LEAF]
        return self.value[node]


def _segment_starts(sorted_keys: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1]])


def grow_tree(x: np.ndarray, y: np.ndarray, max_depth: int | None = None,
              min_samples_leaf: int = 1) -> Tree:
    """Fit one tree to every row of (x, y); duplicate rows act as sample weights."""
    n, n_features = x.shape
    feature, threshold, left, right = [LEAF], [0.0], [LEAF], [LEAF]
    values = [y.mean(axis=0)]
    samples = np.arange(n)          # rows still sitting in open nodes
    node_of = np.zeros(n, dtype=np.int64)
    depth = 0
    while samples.size and (max_depth is None or depth < max_depth):
        # per-node sums, sizes and purity, with nodes in ascending id order
        order = np.argsort(node_of, kind="stable")
        nodes_sorted = node_of[order]
        starts = _segment_starts(nodes_sorted)
        open_nodes = nodes_sorted[starts]
        counts = np.diff(np.r_[starts, samples.size])
        ys = y[samples[order]]
        sums = np.add.reduceat(ys, starts, axis=0)
        pure = np.all(np.maximum.reduceat(ys, starts, axis=0)
                      == np.minimum.reduceat(ys, starts, axis=0), axis=1)
        parent_sums = sums
        best_score = np.full(open_nodes.size, -np.inf)
        best_feat = np.full(open_nodes.size, LEAF)
        best_thr = np.zeros(open_nodes.size)
        seg_first = np.repeat(starts, counts)  # position of each row's segment start
        seg_idx = np.repeat(np.arange(open_nodes.size), counts)
        for f in range(n_features):
            xf = x[samples, f]
            o = np.lexsort((xf, node_of))
            xs, ysf = xf[o], y[samples[o]]
            cum = np.cumsum(ysf, axis=0)
            base = np.where(seg_first[:, None] > 0, cum[seg_first - 1], 0.0)
            s_left = cum - base
            n_left = np.arange(samples.size) - seg_first + 1
            n_right = counts[seg_idx] - n_left
            s_right = parent_sums[seg_idx] - s_left
            # split after position i requires a strictly larger next value
            nxt = np.r_[xs[1:], np.inf]
            valid = (n_right >= min_samples_leaf) & (n_left >= min_samples_leaf) & (xs < nxt)
            with np.errstate(divide="ignore", invalid="ignore"):
                score = ((s_left ** 2).sum(axis=1) / n_left
                         + (s_right ** 2).sum(axis=1) / np.maximum(n_right, 1))
            score = np.where(valid, score, -np.inf)
            # best position per segment: highest score, then earliest position
            pick = np.lexsort((np.arange(samples.size), -score, seg_idx))[starts]
            sc = score[pick]
            better = sc > best_score
            best_score = np.where(better, sc, best_score)
            best_feat = np.where(better, f, best_feat)
            lo_v = xs[pick]
            hi_v = xs[np.minimum(pick + 1, samples.size - 1)]
            mid = lo_v + (hi_v - lo_v) / 2.0
            mid = np.where((mid >= hi_v) | (mid < lo_v), lo_v, mid)
            best_thr = np.where(better, mid, best_thr)

        split = np.isfinite(best_score) & ~pure
        if not split.any():
            break
        new_id = np.full(open_nodes.size, LEAF)
        next_id = len(feature)
        for j in np.flatnonzero(split):
            nid = open_nodes[j]
            feature[nid], threshold[nid] = int(best_feat[j]), float(best_thr[j])
            left[nid], right[nid] = next_id, next_id + 1
            new_id[j] = next_id
            feature += [LEAF, LEAF]
            threshold += [0.0, 0.0]
            left += [LEAF, LEAF]
            right += [LEAF, LEAF]
            values += [None, None]
            next_id += 2

        # route samples of split nodes to their children; drop the rest
        pos = np.searchsorted(open_nodes, node_of)
        keep = split[pos]
        samples, node_of, pos = samples[keep], node_of[keep], pos[keep]
        goes_left = x[samples, best_feat[pos]] <= best_thr[pos]
        node_of = new_id[pos] + np.where(goes_left, 0, 1)
        order = np.argsort(node_of, kind="stable")
        nodes_sorted = node_of[order]
        starts = _segment_starts(nodes_sorted)
        child_sums = np.add.reduceat(y[samples[order]], starts, axis=0)
        child_counts = np.diff(np.r_[starts, samples.size])
        for nid, s, c in zip(nodes_sorted[starts], child_sums, child_counts):
            values[nid] = s / c
        depth += 1

    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(values, dtype=np.float64).reshape(len(values), y.shape[1]))


class RandomForestRegressor:
    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_leaf: int = 1, bootstrap: bool = True, seed: int = 0):
        if n_trees < 1:
            raise ValueError("n_trees must be positive")
        if min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be positive")
        self.n_trees, self.max_depth = int(n_trees), max_depth
        self.min_samples_leaf, self.bootstrap, self.seed = int(min_samples_leaf), bool(bootstrap), seed
        self.trees: list[Tree] = []

    def fit(self, x: np.ndarray, y: np.ndarray) -> "RandomForestRegressor":
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = len(x)
        self.trees = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rows = np.random.default_rng(child).integers(0, n, n) if self.bootstrap else np.arange(n)
            self.trees.append(grow_tree(x[rows], y[rows], self.max_depth, self.min_samples_leaf))
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        acc = self.trees[0].predict(x).copy()
        for t in self.trees[1:]:
            acc += t.predict(x)
        return acc / len(self.trees)

    def state(self) -> tuple[dict, dict]:
        meta = {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf, "bootstrap": self.bootstrap,
                "seed": self.seed}
        sizes = np.array([t.n_nodes for t in self.trees], dtype=np.int64)
        arrays = {"tree_sizes": sizes}
        for field in ("feature", "threshold", "left", "right", "value"):
            arrays[field] = np.concatenate([getattr(t, field) for t in self.trees])
        return meta, arrays

    @classmethod
    def from_state(cls, meta: dict, arrays: dict) -> "RandomForestRegressor":
        m = cls(meta["n_trees"], meta["max_depth"], meta["min_samples_leaf"], meta["bootstrap"],
                meta["seed"])
        bounds = np.r_[0, np.cumsum(arrays["tree_sizes"])]
        m.trees = [Tree(*(arrays[f][a:b] for f in ("feature", "threshold", "left", "right", "value")))
                   for a, b in zip(bounds[:-1], bounds[1:])]
        return m
