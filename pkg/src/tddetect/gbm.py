"""Gradient-boosted decision trees with a soft-label cross-entropy objective.

Trees are grown best-first (the frontier leaf with the largest split gain is
expanded next) with exact sorted split search. Labels may be any real in
[0,1]; the loss is -[y log p + (1-y) log(1-p)] with p = sigmoid(raw score),
giving gradient p - y and hessian p(1-p). Optional per-row weights multiply
both. Training is deterministic: no sampling anywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

FORMAT_VERSION = 1
_HESSIAN_FLOOR = 1e-12
_BASE_CLAMP = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    num_trees: int = 60
    max_leaves: int = 9
    min_data_in_leaf: int = 10
    learning_rate: float = 0.04
    l2_reg: float = 0.0
    min_split_gain: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 0:
            raise ValueError("num_trees must be >= 0")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")
        if self.min_data_in_leaf < 1:
            raise ValueError("min_data_in_leaf must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0,1]")


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def xentropy_loss(raw: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Weighted mean cross-entropy of raw scores against soft labels."""
    p = np.clip(sigmoid(raw), 1e-15, 1.0 - 1e-15)
    losses = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    if weights is None:
        return float(np.mean(losses))
    return float(np.sum(weights * losses) / np.sum(weights))


def best_split(
    X: np.ndarray,
    rows: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    config: TrainConfig,
) -> Split | None:
    """Exact search over all features and midpoints between distinct values.

    Maximizes 0.5*[GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2)]; both children
    must hold at least min_data_in_leaf rows. Ties break toward the lower
    feature index, then the lower threshold.
    """
    n = rows.shape[0]
    min_leaf = config.min_data_in_leaf
    if n < 2 * min_leaf:
        return None
    Xn = X[rows]
    gn = g[rows]
    hn = h[rows]
    G = float(gn.sum())
    H = float(hn.sum())
    lam = config.l2_reg
    parent = G * G / max(H + lam, _HESSIAN_FLOOR)

    order = np.argsort(Xn, axis=0, kind="stable")
    Xs = np.take_along_axis(Xn, order, axis=0)
    GL = np.cumsum(gn[order], axis=0)
    HL = np.cumsum(hn[order], axis=0)

    # candidate boundary after sorted position i (left block = 0..i)
    GLb = GL[:-1]
    HLb = HL[:-1]
    GRb = G - GLb
    HRb = H - HLb
    gains = 0.5 * (
        GLb**2 / np.maximum(HLb + lam, _HESSIAN_FLOOR)
        + GRb**2 / np.maximum(HRb + lam, _HESSIAN_FLOOR)
        - parent
    )
    counts_left = np.arange(1, n)[:, None]
    valid = (
        (Xs[1:] != Xs[:-1])
        & (counts_left >= min_leaf)
        & ((n - counts_left) >= min_leaf)
    )
    gains = np.where(valid, gains, -np.inf)
    if not np.isfinite(gains).any():
        return None
    per_feature_best = np.argmax(gains, axis=0)  # first max -> lowest threshold
    per_feature_gain = gains[per_feature_best, np.arange(gains.shape[1])]
    fi = int(np.argmax(per_feature_gain))  # first max -> lowest feature index
    gain = float(per_feature_gain[fi])
    if not np.isfinite(gain) or gain <= config.min_split_gain:
        return None
    i = int(per_feature_best[fi])
    threshold = float((Xs[i, fi] + Xs[i + 1, fi]) / 2.0)
    return Split(feature=fi, threshold=threshold, gain=gain)


def _leaf_value(g_sum: float, h_sum: float, config: TrainConfig) -> float:
    return -config.learning_rate * g_sum / max(h_sum + config.l2_reg, _HESSIAN_FLOOR)


def _grow_tree(
    X: np.ndarray, g: np.ndarray, h: np.ndarray, config: TrainConfig
) -> tuple[dict, np.ndarray]:
    """Grow one tree best-first. Returns (root node, per-row raw contribution)."""
    n = X.shape[0]
    all_rows = np.arange(n)
    root: dict = {}
    contributions = np.zeros(n)
    # frontier entries: (gain, creation order, node dict, rows, split)
    frontier: list[tuple[float, int, dict, np.ndarray, Split]] = []
    counter = 0

    def consider(node: dict, rows: np.ndarray) -> None:
        nonlocal counter
        split = best_split(X, rows, g, h, config)
        if split is not None:
            frontier.append((split.gain, counter, node, rows, split))
        counter += 1

    leaf_rows: list[tuple[dict, np.ndarray]] = [(root, all_rows)]
    consider(root, all_rows)
    n_leaves = 1
    while n_leaves < config.max_leaves and frontier:
        # largest gain; ties broken by creation order
        best_i = max(range(len(frontier)), key=lambda i: (frontier[i][0], -frontier[i][1]))
        _, _, node, rows, split = frontier.pop(best_i)
        mask = X[rows, split.feature] <= split.threshold
        left_rows = rows[mask]
        right_rows = rows[~mask]
        left: dict = {}
        right: dict = {}
        node["split_feature"] = split.feature
        node["threshold"] = split.threshold
        node["gain"] = split.gain
        node["left"] = left
        node["right"] = right
        leaf_rows = [(nd, r) for nd, r in leaf_rows if nd is not node]
        leaf_rows.append((left, left_rows))
        leaf_rows.append((right, right_rows))
        consider(left, left_rows)
        consider(right, right_rows)
        n_leaves += 1

    for node, rows in leaf_rows:
        value = _leaf_value(float(g[rows].sum()), float(h[rows].sum()), config)
        node["leaf_value"] = value
        node["count"] = int(rows.shape[0])
        contributions[rows] = value
    return root, contributions


@dataclass
class GbmModel:
    base_score: float  # raw log-odds
    trees: list[dict]
    config: TrainConfig
    feature_names: list[str]
    registry_version: str = ""
    tree_contribs: None = field(default=None, repr=False, compare=False)

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.feature_names):
            raise DataError(
                f"feature count mismatch: model has {len(self.feature_names)}, got {X.shape[1]}"
            )
        out = np.full(X.shape[0], self.base_score)
        idx = np.arange(X.shape[0])
        for tree in self.trees:
            _route(tree, X, idx, out)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.predict_raw(X))


def _route(node: dict, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if "leaf_value" in node:
        out[idx] += node["leaf_value"]
        return
    mask = X[idx, node["split_feature"]] <= node["threshold"]
    if mask.any():
        _route(node["left"], X, idx[mask], out)
    if (~mask).any():
        _route(node["right"], X, idx[~mask], out)


def train(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig | None = None,
    weights: np.ndarray | None = None,
    feature_names: list[str] | None = None,
    registry_version: str = "",
) -> GbmModel:
    config = config or TrainConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("empty training data")
    if y.shape[0] != X.shape[0]:
        raise DataError("labels and rows must align")
    if np.any((y < 0) | (y > 1)):
        raise DataError("labels must lie in [0,1]")
    if X.shape[0] < config.min_data_in_leaf:
        raise DataError("fewer rows than min_data_in_leaf")
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(X.shape[1])]
    w = np.ones(X.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise DataError("negative training weights")

    mean_label = float(np.sum(w * y) / np.sum(w))
    mean_label = min(max(mean_label, _BASE_CLAMP), 1.0 - _BASE_CLAMP)
    base = logit(mean_label)

    raw = np.full(X.shape[0], base)
    trees: list[dict] = []
    for _ in range(config.num_trees):
        p = sigmoid(raw)
        g = (p - y) * w
        h = p * (1.0 - p) * w
        tree, contrib = _grow_tree(X, g, h, config)
        raw = raw + contrib
        trees.append(tree)
    return GbmModel(
        base_score=base, trees=trees, config=config,
        feature_names=list(feature_names), registry_version=registry_version,
    )


def feature_importance(model: GbmModel) -> dict[str, float]:
    """Per-feature split gain summed over all trees, normalized to sum 1."""
    gains: dict[str, float] = {}

    def walk(node: dict) -> None:
        if "leaf_value" in node:
            return
        name = model.feature_names[node["split_feature"]]
        gains[name] = gains.get(name, 0.0) + node["gain"]
        walk(node["left"])
        walk(node["right"])

    for tree in model.trees:
        walk(tree)
    total = sum(gains.values())
    if total <= 0:
        return {}
    return {name: gain / total for name, gain in sorted(gains.items())}


# ---------------------------------------------------------------------------
# serialization and dumps


def _node_to_obj(node: dict, feature_names: list[str]) -> dict:
    if "leaf_value" in node:
        return {"leaf_value": node["leaf_value"], "count": node["count"]}
    return {
        "split_feature": feature_names[node["split_feature"]],
        "feature_index": node["split_feature"],
        "threshold": node["threshold"],
        "gain": node["gain"],
        "left": _node_to_obj(node["left"], feature_names),
        "right": _node_to_obj(node["right"], feature_names),
    }


def _node_from_obj(obj: dict) -> dict:
    if "leaf_value" in obj:
        return {"leaf_value": float(obj["leaf_value"]), "count": int(obj.get("count", 0))}
    return {
        "split_feature": int(obj["feature_index"]),
        "threshold": float(obj["threshold"]),
        "gain": float(obj.get("gain", 0.0)),
        "left": _node_from_obj(obj["left"]),
        "right": _node_from_obj(obj["right"]),
    }


def model_to_json(model: GbmModel) -> str:
    obj = {
        "format_version": FORMAT_VERSION,
        "registry_version": model.registry_version,
        "base_score": model.base_score,
        "config": asdict(model.config),
        "feature_names": model.feature_names,
        "trees": [_node_to_obj(t, model.feature_names) for t in model.trees],
    }
    return json.dumps(obj, sort_keys=True)


def model_from_json(text: str) -> GbmModel:
    obj = json.loads(text)
    if obj.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format version: {obj.get('format_version')}")
    return GbmModel(
        base_score=float(obj["base_score"]),
        trees=[_node_from_obj(t) for t in obj["trees"]],
        config=TrainConfig(**obj["config"]),
        feature_names=list(obj["feature_names"]),
        registry_version=obj.get("registry_version", ""),
    )


def save_model(model: GbmModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), "utf-8")


def load_model(path: str | Path) -> GbmModel:
    return model_from_json(Path(path).read_text("utf-8"))


def dump_trees(model: GbmModel) -> str:
    """Human-readable nested rendering of every tree."""
    lines = [f"base_score {model.base_score!r}"]

    def walk(node: dict, depth: int) -> None:
        pad = "  " * depth
        if "leaf_value" in node:
            lines.append(f"{pad}leaf value={node['leaf_value']!r} count={node['count']}")
            return
        name = model.feature_names[node["split_feature"]]
        lines.append(f"{pad}{name} <= {node['threshold']!r} (gain={node['gain']:.6g})")
        walk(node["left"], depth + 1)
        walk(node["right"], depth + 1)

    for i, tree in enumerate(model.trees):
        lines.append(f"tree {i}:")
        walk(tree, 1)
    return "\n".join(lines) + "\n"
