"""Versioned on-disk model format: one JSON document per model.

The payload is self-describing: it names the model kind, the feature
columns it was trained on, all hyperparameters including the seed, and the
full tree structures. Serialization is canonical (sorted keys, compact
separators), so identical models produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .classifiers import (
    BoostModel,
    ForestModel,
    KnnModel,
    Leaf,
    Split,
    TrainedModel,
    TreeModel,
    TreeNode,
)
from .errors import ParseError, SchemaError

MODEL_FORMAT = "difem-model"
MODEL_VERSION = 1


def _encode_node(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": {"label": node.label, "counts": list(node.counts)}}
    return {
        "split": {
            "feature": node.feature,
            "threshold": node.threshold,
            "left": _encode_node(node.left),
            "right": _encode_node(node.right),
        }
    }


def _decode_node(payload: dict) -> TreeNode:
    if "leaf" in payload:
        leaf = payload["leaf"]
        return Leaf(int(leaf["label"]), tuple(int(c) for c in leaf["counts"]))
    if "split" in payload:
        split = payload["split"]
        return Split(
            int(split["feature"]),
            float(split["threshold"]),
            _decode_node(split["left"]),
            _decode_node(split["right"]),
        )
    raise SchemaError("tree node must hold either a leaf or a split")


def model_kind(model: TrainedModel) -> str:
    return {
        TreeModel: "decision_tree",
        ForestModel: "random_forest",
        BoostModel: "adaboost",
        KnnModel: "knn",
    }[type(model)]


def model_to_payload(model: TrainedModel) -> dict:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model_kind(model),
        "n_features": model.n_features,
        "feature_names": list(model.feature_names),
    }
    if isinstance(model, TreeModel):
        payload["tree"] = _encode_node(model.root)
    elif isinstance(model, ForestModel):
        payload["seed"] = model.seed
        payload["features_per_split"] = model.features_per_split
        payload["trees"] = [_encode_node(tree) for tree in model.trees]
    elif isinstance(model, BoostModel):
        payload["n_estimators"] = model.n_estimators
        payload["stumps"] = [
            {"alpha": alpha, "tree": _encode_node(stump)} for stump, alpha in model.stumps
        ]
    else:
        payload["k"] = model.k
        payload["rows"] = [list(row) for row in model.features.tolist()]
        payload["labels"] = [int(v) for v in model.labels.tolist()]
    return payload


def payload_to_model(payload: dict) -> TrainedModel:
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise SchemaError(f'model document must declare "format": "{MODEL_FORMAT}"')
    if payload.get("version") != MODEL_VERSION:
        raise SchemaError(f"unsupported model version {payload.get('version')!r}")
    kind = payload.get("kind")
    n_features = int(payload["n_features"])
    names = tuple(payload["feature_names"])
    if kind == "decision_tree":
        return TreeModel(_decode_node(payload["tree"]), n_features, names)
    if kind == "random_forest":
        trees = tuple(_decode_node(t) for t in payload["trees"])
        return ForestModel(
            trees, int(payload["seed"]), int(payload["features_per_split"]), n_features, names
        )
    if kind == "adaboost":
        stumps = tuple(
            (_decode_node(s["tree"]), float(s["alpha"])) for s in payload["stumps"]
        )
        return BoostModel(stumps, int(payload["n_estimators"]), n_features, names)
    if kind == "knn":
        return KnnModel(payload["rows"], payload["labels"], int(payload["k"]), names)
    raise SchemaError(f"unknown model kind {kind!r}")


def dumps_model(model: TrainedModel) -> str:
    return json.dumps(model_to_payload(model), sort_keys=True, separators=(",", ":")) + "\n"


def loads_model(text: str) -> TrainedModel:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model document is not valid JSON: {exc.msg}", offset=exc.pos) from exc
    return payload_to_model(payload)


def save_model(path, model: TrainedModel) -> Path:
    path = Path(path)
    path.write_text(dumps_model(model), encoding="utf-8")
    return path


def load_model(path) -> TrainedModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
