"""Two-class classifiers implemented directly on numpy arrays.

Four models: a CART decision tree grown to purity, a bootstrap-aggregated
forest of such trees, boosted depth-1 stumps, and k-nearest neighbours.
Everything is deterministic given (data, hyperparameters, seed): iteration
orders are fixed, every tie-break is written down (ties always resolve to
class 0), and forest tree t draws from a generator derived from (seed, t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, ContractViolation, DimensionError

CLASSIFIER_KINDS = ("decision_tree", "random_forest", "adaboost", "knn")

# A perfect stump ends boosting; its stage weight is capped here so it still
# outvotes any finite combination of earlier stumps.
STAGE_WEIGHT_CAP = 1e6


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with 0/1 labels (0 = NonFight, 1 = Fight)."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labs = np.asarray(self.labels, dtype=int)
        if feats.ndim != 2:
            raise ContractViolation("features must be a 2-D matrix")
        if labs.shape != (feats.shape[0],):
            raise ContractViolation("labels must align with feature rows")
        if labs.size and not np.isin(labs, (0, 1)).all():
            raise ContractViolation("labels must be 0 or 1")
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(feats.shape[1]))
        if len(names) != feats.shape[1]:
            raise ContractViolation("feature_names must match the feature width")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)


@dataclass
class Leaf:
    label: int
    counts: tuple[int, int]


@dataclass
class Split:
    feature: int
    threshold: float
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    n_features: int
    feature_names: tuple[str, ...]


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    seed: int
    features_per_split: int
    n_features: int
    feature_names: tuple[str, ...]

    @property
    def n_trees(self) -> int:
        return len(self.trees)


@dataclass(frozen=True)
class BoostModel:
    stumps: tuple[tuple[TreeNode, float], ...]
    n_estimators: int
    n_features: int
    feature_names: tuple[str, ...]


@dataclass(frozen=True)
class KnnModel:
    features: np.ndarray
    labels: np.ndarray
    k: int = 5
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labs = np.asarray(self.labels, dtype=int)
        if feats.ndim != 2 or labs.shape != (feats.shape[0],):
            raise ContractViolation("stored rows and labels must align")
        if not 1 <= self.k <= feats.shape[0]:
            raise ContractViolation(f"k must be in [1, {feats.shape[0]}], got {self.k}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


TrainedModel = Union[TreeModel, ForestModel, BoostModel, KnnModel]


def gini(class_counts: Sequence[float]) -> float:
    """Gini impurity of a two-class count pair."""
    n0, n1 = class_counts
    total = n0 + n1
    if total < 1:
        raise ContractViolation("gini needs at least one sample")
    p0 = n0 / total
    p1 = n1 / total
    return 1.0 - p0 * p0 - p1 * p1


def _counts(labels: np.ndarray) -> tuple[int, int]:
    ones = int(labels.sum())
    return (labels.size - ones, ones)


def _majority(counts: tuple[int, int]) -> int:
    # Ties resolve to class 0.
    return 1 if counts[1] > counts[0] else 0


def _weighted_majority(labels: np.ndarray, weights: np.ndarray) -> int:
    w1 = float(weights[labels == 1].sum())
    w0 = float(weights[labels == 0].sum())
    return 1 if w1 > w0 else 0


def _best_split(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, feature_ids: Iterable[int]
) -> Optional[tuple[float, int, float]]:
    """Best (impurity decrease, feature, threshold) over midpoint candidates.

    Candidates sit halfway between consecutive distinct sorted values of a
    feature. Scanning order is feature-ascending then threshold-ascending,
    and only a strictly larger decrease replaces the incumbent, so the
    outcome is deterministic. None when no candidate reduces impurity.
    """
    total0 = float(w[y == 0].sum())
    total1 = float(w[y == 1].sum())
    total = total0 + total1
    parent = 1.0 - (total0 / total) ** 2 - (total1 / total) ** 2
    best: Optional[tuple[float, int, float]] = None
    for f in feature_ids:
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        vs = values[order]
        wo = w[order]
        yo = y[order]
        cum0 = np.cumsum(np.where(yo == 0, wo, 0.0))
        cum1 = np.cumsum(np.where(yo == 1, wo, 0.0))
        cuts = np.flatnonzero(vs[1:] != vs[:-1])
        if cuts.size == 0:
            continue
        l0 = cum0[cuts]
        l1 = cum1[cuts]
        r0 = total0 - l0
        r1 = total1 - l1
        wl = l0 + l1
        wr = r0 + r1
        dl = np.where(wl > 0, wl, 1.0)
        dr = np.where(wr > 0, wr, 1.0)
        gl = np.where(wl > 0, 1.0 - (l0 / dl) ** 2 - (l1 / dl) ** 2, 0.0)
        gr = np.where(wr > 0, 1.0 - (r0 / dr) ** 2 - (r1 / dr) ** 2, 0.0)
        decrease = parent - (wl * gl + wr * gr) / total
        i = int(np.argmax(decrease))
        if decrease[i] > 0 and (best is None or decrease[i] > best[0]):
            lo, hi = float(vs[cuts[i]]), float(vs[cuts[i] + 1])
            threshold = (lo + hi) / 2.0
            if not lo <= threshold < hi:  # midpoint rounded onto hi
                threshold = lo
            best = (float(decrease[i]), int(f), threshold)
    return best


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_features: Optional[int],
    rng: Optional[np.random.Generator],
) -> TreeNode:
    """Grow a CART tree to purity, depth-first, left child first."""
    d = X.shape[1]
    holder: list[Optional[TreeNode]] = [None]
    stack: list[tuple[np.ndarray, object, int]] = [(np.arange(y.size), holder, 0)]
    while stack:
        rows, container, slot = stack.pop()
        counts = _counts(y[rows])
        node: TreeNode
        if counts[0] == 0 or counts[1] == 0:
            node = Leaf(_majority(counts), counts)
        else:
            if max_features is None:
                feats: Iterable[int] = range(d)
            else:
                feats = np.sort(rng.permutation(d)[:max_features])
            best = _best_split(X[rows], y[rows], np.ones(rows.size), feats)
            if best is None:
                node = Leaf(_majority(counts), counts)
            else:
                _, feature, threshold = best
                node = Split(feature, threshold)
                mask = X[rows, feature] <= threshold
                stack.append((rows[~mask], node, 2))
                stack.append((rows[mask], node, 1))
        if slot == 0:
            container[0] = node
        elif slot == 1:
            container.left = node
        else:
            container.right = node
    return holder[0]


def train_tree(
    data: Dataset,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> TreeModel:
    """CART decision tree with no depth limit.

    Recursion stops when a node is pure or no midpoint split reduces Gini
    impurity; leaves predict the majority class (ties to class 0). When
    ``max_features`` is set, each node considers a uniform feature subset of
    that size drawn from ``rng``.
    """
    if data.n_rows == 0:
        raise ContractViolation("cannot train a tree on an empty dataset")
    if max_features is not None:
        if rng is None:
            raise ConfigError("max_features requires an rng")
        if not 1 <= max_features <= data.n_features:
            raise ConfigError(f"max_features must be in [1, {data.n_features}]")
    root = _grow_tree(data.features, data.labels, max_features, rng)
    return TreeModel(root, data.n_features, data.feature_names)


def train_forest(data: Dataset, n_trees: int = 100, seed: int = 42) -> ForestModel:
    """Bootstrap-aggregated trees with per-node feature subsampling.

    Tree t draws its bootstrap sample (size n, with replacement) and its
    node feature subsets of size floor(sqrt(d)) from a dedicated generator
    seeded by (seed, t), so any tree can be rebuilt in isolation and the
    whole model reproduces bit for bit. Prediction is a majority vote, ties
    to class 0.
    """
    if data.n_rows == 0:
        raise ContractViolation("cannot train a forest on an empty dataset")
    if n_trees < 1:
        raise ConfigError("n_trees must be >= 1")
    if seed < 0:
        raise ConfigError("seed must be >= 0")
    features_per_split = max(1, math.isqrt(data.n_features))
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(0, data.n_rows, size=data.n_rows)
        trees.append(_grow_tree(data.features[rows], data.labels[rows], features_per_split, rng))
    return ForestModel(tuple(trees), seed, features_per_split, data.n_features, data.feature_names)


def stage_weight(error: float) -> float:
    """Boosting stage weight ln((1 - e) / e) for a weighted error in (0, 1)."""
    if not 0.0 < error < 1.0:
        raise ContractViolation("stage weight is defined for errors strictly inside (0, 1)")
    return math.log((1.0 - error) / error)


def _train_stump(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> TreeNode:
    best = _best_split(X, y, w, range(X.shape[1]))
    if best is None:
        return Leaf(_weighted_majority(y, w), _counts(y))
    _, feature, threshold = best
    mask = X[:, feature] <= threshold
    left = Leaf(_weighted_majority(y[mask], w[mask]), _counts(y[mask]))
    right = Leaf(_weighted_majority(y[~mask], w[~mask]), _counts(y[~mask]))
    return Split(feature, threshold, left, right)


def train_adaboost(
    data: Dataset,
    n_estimators: int = 100,
    history: Optional[list] = None,
) -> BoostModel:
    """Discrete two-class boosting over depth-1 Gini stumps.

    Each round fits a stump under the current sample weights, computes the
    weighted error e, assigns stage weight ln((1-e)/e), multiplies the
    weights of misclassified rows by exp(alpha) and renormalizes. Training
    stops early on a perfect stump (kept, with a capped stage weight) or
    when e >= 0.5 (that stump is dropped). Prediction is the sign of the
    stage-weighted vote with classes mapped to -1/+1; ties go to class 0.

    ``history``, when given an empty list, receives one dict per completed
    round with the error, stage weight and post-update weight sum.
    """
    if data.n_rows == 0:
        raise ContractViolation("cannot boost an empty dataset")
    if n_estimators < 1:
        raise ConfigError("n_estimators must be >= 1")
    counts = _counts(data.labels)
    if counts[0] == 0 or counts[1] == 0:
        raise ContractViolation("boosting requires both classes in the training data")

    X, y = data.features, data.labels
    weights = np.full(y.size, 1.0 / y.size)
    stumps: list[tuple[TreeNode, float]] = []
    for round_index in range(n_estimators):
        stump = _train_stump(X, y, weights)
        predictions = np.array([_predict_node(stump, row) for row in X])
        miss = predictions != y
        error = float(weights[miss].sum())
        if error <= 0.0:
            stumps.append((stump, STAGE_WEIGHT_CAP))
            if history is not None:
                history.append(
                    {"round": round_index, "error": 0.0, "alpha": STAGE_WEIGHT_CAP,
                     "weight_sum": float(weights.sum())}
                )
            break
        if error >= 0.5:
            break
        alpha = stage_weight(error)
        stumps.append((stump, alpha))
        weights = weights * np.exp(alpha * miss)
        weights = weights / weights.sum()
        if history is not None:
            history.append(
                {"round": round_index, "error": error, "alpha": alpha,
                 "weight_sum": float(weights.sum())}
            )
    return BoostModel(tuple(stumps), n_estimators, data.n_features, data.feature_names)


def _predict_node(node: TreeNode, x: np.ndarray) -> int:
    while isinstance(node, Split):
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.label


def knn_predict(model: KnnModel, query) -> int:
    """Majority label among the k nearest stored rows.

    Distance ties resolve to the lower stored-row index (stable sort on the
    squared distances); vote ties resolve to class 0.
    """
    q = np.asarray(query, dtype=float)
    if q.ndim != 1 or q.size != model.n_features:
        raise DimensionError(f"query must have {model.n_features} values, got {q.size}")
    if model.k > model.features.shape[0]:
        raise ContractViolation("model stores fewer rows than k")
    d2 = ((model.features - q) ** 2).sum(axis=1)
    nearest = np.argsort(d2, kind="stable")[: model.k]
    ones = int(model.labels[nearest].sum())
    return 1 if ones > model.k - ones else 0


def predict(model: TrainedModel, features) -> int:
    """Uniform prediction facade over the four model kinds."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got {x.size}")
    if isinstance(model, TreeModel):
        return _predict_node(model.root, x)
    if isinstance(model, ForestModel):
        ones = sum(_predict_node(tree, x) for tree in model.trees)
        return 1 if 2 * ones > len(model.trees) else 0
    if isinstance(model, BoostModel):
        score = 0.0
        for stump, alpha in model.stumps:
            score += alpha if _predict_node(stump, x) == 1 else -alpha
        return 1 if score > 0 else 0
    if isinstance(model, KnnModel):
        return knn_predict(model, x)
    raise ConfigError(f"unknown model type {type(model).__name__}")


def predict_many(model: TrainedModel, matrix) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2:
        raise DimensionError("prediction input must be a 2-D matrix")
    return np.array([predict(model, row) for row in X], dtype=int)


@dataclass(frozen=True)
class ClassifierConfig:
    """Which model to train and with what hyperparameters."""

    kind: str
    n_trees: int = 100
    n_estimators: int = 100
    k: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ConfigError(f"kind must be one of {CLASSIFIER_KINDS}, got {self.kind!r}")


def train_model(config: ClassifierConfig, data: Dataset) -> TrainedModel:
    if config.kind == "decision_tree":
        return train_tree(data)
    if config.kind == "random_forest":
        return train_forest(data, n_trees=config.n_trees, seed=config.seed)
    if config.kind == "adaboost":
        return train_adaboost(data, n_estimators=config.n_estimators)
    return KnnModel(data.features.copy(), data.labels.copy(), config.k, data.feature_names)
