"""Bagged regression trees: the feature-pipeline baseline regressor.

Each tree fits a bootstrap resample (size n, with replacement, seeded
per tree) and greedily splits on the threshold minimizing the summed
squared error of the two children, scanning midpoints of consecutive
sorted unique feature values over all features. Leaves store means, so
predictions are bounded by the training target range. Defaults mirror
the usual library regressor: 100 trees, all features considered, nodes
split down to 2 samples, unlimited depth.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._rng import SplitMix64
from .errors import CheckpointError, NumericError

__all__ = [
    "ForestConfig",
    "Forest",
    "forest_fit",
    "forest_predict",
    "save_forest",
    "load_forest",
]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    min_samples_split: int = 2
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise NumericError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_samples_split < 2:
            raise NumericError(f"min_samples_split must be >= 2, got {self.min_samples_split}")


@dataclass(frozen=True)
class _Node:
    # Leaf when feature < 0; internal nodes carry the split and child ids.
    feature: int
    threshold: float
    left: int
    right: int
    value: float


@dataclass(frozen=True)
class Forest:
    trees: tuple[tuple[_Node, ...], ...]
    config: ForestConfig
    n_features: int


def _best_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float] | None:
    """Feature and threshold minimizing child SSE; first winner on ties."""
    n = y.shape[0]
    best_sse = np.inf
    best: tuple[int, float] | None = None
    for feature in range(X.shape[1]):
        column = X[:, feature]
        order = np.argsort(column, kind="stable")
        xs = column[order]
        ys = y[order]
        # prefix sums give each candidate's left/right SSE in O(1)
        csum = np.cumsum(ys)
        csum_sq = np.cumsum(ys * ys)
        total = csum[-1]
        total_sq = csum_sq[-1]
        boundaries = np.nonzero(xs[1:] > xs[:-1])[0]  # split after index i
        for i in boundaries:
            n_left = i + 1
            n_right = n - n_left
            left_sum = csum[i]
            left_sq = csum_sq[i]
            sse = (left_sq - left_sum * left_sum / n_left) + (
                (total_sq - left_sq) - (total - left_sum) ** 2 / n_right
            )
            if sse < best_sse:
                best_sse = sse
                best = (feature, (xs[i] + xs[i + 1]) / 2.0)
    return best


def _grow(X: np.ndarray, y: np.ndarray, min_samples_split: int, nodes: list[_Node]) -> int:
    if y.shape[0] < min_samples_split or np.all(y == y[0]):
        nodes.append(_Node(-1, 0.0, -1, -1, float(y.mean())))
        return len(nodes) - 1
    split = _best_split(X, y)
    if split is None:
        nodes.append(_Node(-1, 0.0, -1, -1, float(y.mean())))
        return len(nodes) - 1
    feature, threshold = split
    mask = X[:, feature] <= threshold
    left = _grow(X[mask], y[mask], min_samples_split, nodes)
    right = _grow(X[~mask], y[~mask], min_samples_split, nodes)
    nodes.append(_Node(feature, threshold, left, right, float(y.mean())))
    return len(nodes) - 1


def forest_fit(X, y, config: ForestConfig) -> Forest:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise NumericError(f"bad training shapes: X {X.shape}, y {y.shape}")
    if X.shape[0] < 2:
        raise NumericError("need at least 2 training samples")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NumericError("non-finite training values")

    master = SplitMix64(config.seed)
    tree_seeds = [master.next_uint64() for _ in range(config.n_trees)]
    n = X.shape[0]
    trees = []
    for tree_seed in tree_seeds:
        if config.bootstrap:
            rng = SplitMix64(tree_seed)
            idx = np.array([rng.next_below(n) for _ in range(n)], dtype=np.intp)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        nodes: list[_Node] = []
        _grow(Xb, yb, config.min_samples_split, nodes)
        trees.append(tuple(nodes))
    return Forest(trees=tuple(trees), config=config, n_features=X.shape[1])


def _predict_tree(nodes: tuple[_Node, ...], x: np.ndarray) -> float:
    node = nodes[-1]  # root is appended last
    while node.feature >= 0:
        node = nodes[node.left] if x[node.feature] <= node.threshold else nodes[node.right]
    return node.value


def forest_predict(forest: Forest, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (forest.n_features,):
        raise NumericError(f"input has shape {x.shape}, expected ({forest.n_features},)")
    return float(np.mean([_predict_tree(tree, x) for tree in forest.trees]))


_FOREST_FORMAT = "asag-forest-ckpt v1"


def save_forest(forest: Forest, path: str | Path, metadata: dict | None = None) -> None:
    payload = {
        "format": _FOREST_FORMAT,
        "config": asdict(forest.config),
        "metadata": metadata or {},
        "n_features": forest.n_features,
        "trees": [
            [[n.feature, n.threshold, n.left, n.right, n.value] for n in tree]
            for tree in forest.trees
        ],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), "utf-8")


def load_forest(path: str | Path) -> tuple[Forest, dict]:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"missing checkpoint: {path}")
    try:
        payload = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path.name}: not a valid checkpoint: {exc}") from exc
    if payload.get("format") != _FOREST_FORMAT:
        raise CheckpointError(f"{path.name}: unknown checkpoint format {payload.get('format')!r}")
    trees = tuple(
        tuple(_Node(int(f), float(t), int(l), int(r), float(v)) for f, t, l, r, v in tree)
        for tree in payload["trees"]
    )
    forest = Forest(trees=trees, config=ForestConfig(**payload["config"]), n_features=int(payload["n_features"]))
    return forest, payload.get("metadata", {})
