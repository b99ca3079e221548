"""CART decision tree over (velocity, mean-free range) features.

Greedy binary splits minimize Gini impurity; candidate thresholds are
the midpoints of consecutive distinct sorted feature values. The search
scans features in ascending index order and thresholds in ascending
value order, accepting only strict improvements, which makes training
fully deterministic and makes ties resolve to the lowest feature index
and lowest threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .body import CLASS_ORDER, LimbClass
from .errors import DataContractError
from .features import FeatureSample, feature_matrix

FEATURE_NAMES = ("velocity", "mean_free_range")
TREE_FORMAT_VERSION = 1

N_CLASSES = len(CLASS_ORDER)


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (counts only)."""

    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def __eq__(self, other):
        if not isinstance(other, TreeNode):
            return NotImplemented
        if self.is_leaf != other.is_leaf:
            return False
        if self.is_leaf:
            return np.array_equal(self.counts, other.counts)
        return (
            self.feature == other.feature
            and self.threshold == other.threshold
            and self.left == other.left
            and self.right == other.right
        )


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _best_split(x: np.ndarray, y: np.ndarray, min_samples_leaf: int):
    """Best (score, feature, threshold) over both features, or None."""
    n = y.size
    best = None
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        vals = x[order, f]
        labels = y[order]
        one_hot = np.zeros((n, N_CLASSES), dtype=np.int64)
        one_hot[np.arange(n), labels] = 1
        cum = np.cumsum(one_hot, axis=0)
        total = cum[-1]

        left = cum[:-1]  # class counts when splitting after position i
        right = total[None, :] - left
        n_left = np.arange(1, n, dtype=np.int64)
        n_right = n - n_left
        ok = (vals[1:] > vals[:-1]) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not ok.any():
            continue
        gini_left = 1.0 - np.sum((left / n_left[:, None]) ** 2, axis=1)
        gini_right = 1.0 - np.sum((right / n_right[:, None]) ** 2, axis=1)
        score = (n_left * gini_left + n_right * gini_right) / n

        candidates = np.where(ok)[0]
        pick = candidates[np.argmin(score[candidates])]  # first minimum
        cand = (float(score[pick]), f, float(0.5 * (vals[pick] + vals[pick + 1])))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def _grow(x, y, depth, max_depth, min_samples_leaf) -> TreeNode:
    counts = np.bincount(y, minlength=N_CLASSES).astype(np.int64)
    if (
        depth >= max_depth
        or np.count_nonzero(counts) <= 1
        or y.size < 2 * min_samples_leaf
    ):
        return TreeNode(counts=counts)
    best = _best_split(x, y, min_samples_leaf)
    if best is None or best[0] >= _gini(counts):
        return TreeNode(counts=counts)
    _, feature, threshold = best
    go_left = x[:, feature] < threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        left=_grow(x[go_left], y[go_left], depth + 1, max_depth, min_samples_leaf),
        right=_grow(x[~go_left], y[~go_left], depth + 1, max_depth, min_samples_leaf),
    )


@dataclass
class DecisionTree:
    """Trained classifier over the four limb classes."""

    root: TreeNode
    max_depth: int
    min_samples_leaf: int
    seed: int | None = None

    def predict(self, sample: FeatureSample) -> tuple[LimbClass, np.ndarray]:
        """Predicted class and leaf probability vector for one sample."""
        node = self.root
        features = (sample.velocity, sample.mean_free_range)
        while not node.is_leaf:
            node = node.left if features[node.feature] < node.threshold else node.right
        probs = node.counts / node.counts.sum()
        return CLASS_ORDER[int(np.argmax(probs))], probs

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Predicted class indices for an (n, 2) feature matrix."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[0], dtype=np.intp)
        stack = [(self.root, np.arange(x.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = int(np.argmax(node.counts))
                continue
            go_left = x[idx, node.feature] < node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    def depth(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 1
            return walk(node.left) + walk(node.right)

        return walk(self.root)


def tree_train(
    train: list[FeatureSample],
    max_depth: int = 12,
    min_samples_leaf: int = 20,
    seed: int | None = None,
) -> DecisionTree:
    """Fit a CART tree on labeled samples.

    A single-class input yields a single-leaf tree. The seed is carried
    for provenance only; training itself is deterministic.
    """
    if not train:
        raise DataContractError("training set is empty")
    if max_depth < 0 or min_samples_leaf < 1:
        raise DataContractError("invalid tree hyperparameters")
    if len(train) < min_samples_leaf:
        raise DataContractError(
            f"{len(train)} samples cannot satisfy min_samples_leaf={min_samples_leaf}"
        )
    x, y = feature_matrix(train)
    root = _grow(x, y, 0, max_depth, min_samples_leaf)
    return DecisionTree(
        root=root, max_depth=max_depth, min_samples_leaf=min_samples_leaf, seed=seed
    )


def tree_predict(tree: DecisionTree, sample: FeatureSample) -> tuple[LimbClass, np.ndarray]:
    return tree.predict(sample)


def _node_to_json(node: TreeNode):
    if node.is_leaf:
        return {"counts": {c.value: int(n) for c, n in zip(CLASS_ORDER, node.counts)}}
    return {
        "feature": FEATURE_NAMES[node.feature],
        "threshold": node.threshold,
        "left": _node_to_json(node.left),
        "right": _node_to_json(node.right),
    }


def _node_from_json(obj) -> TreeNode:
    if "counts" in obj:
        counts = obj["counts"]
        missing = [c.value for c in CLASS_ORDER if c.value not in counts]
        if missing:
            raise DataContractError(f"leaf lacks counts for: {', '.join(missing)}")
        return TreeNode(
            counts=np.array([int(counts[c.value]) for c in CLASS_ORDER], dtype=np.int64)
        )
    if obj.get("feature") not in FEATURE_NAMES:
        raise DataContractError(f"unknown split feature {obj.get('feature')!r}")
    return TreeNode(
        feature=FEATURE_NAMES.index(obj["feature"]),
        threshold=float(obj["threshold"]),
        left=_node_from_json(obj["left"]),
        right=_node_from_json(obj["right"]),
    )


def save_tree(tree: DecisionTree, path) -> None:
    doc = {
        "format_version": TREE_FORMAT_VERSION,
        "classes": [c.value for c in CLASS_ORDER],
        "max_depth": tree.max_depth,
        "min_samples_leaf": tree.min_samples_leaf,
        "seed": tree.seed,
        "root": _node_to_json(tree.root),
    }
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_tree(path) -> DecisionTree:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataContractError(f"corrupt tree file {path.name}: {exc}") from exc
    version = doc.get("format_version")
    if version != TREE_FORMAT_VERSION:
        raise DataContractError(
            f"tree format version {version!r} unsupported (expected {TREE_FORMAT_VERSION})"
        )
    if doc.get("classes") != [c.value for c in CLASS_ORDER]:
        raise DataContractError("tree class list does not match this build")
    return DecisionTree(
        root=_node_from_json(doc["root"]),
        max_depth=int(doc["max_depth"]),
        min_samples_leaf=int(doc["min_samples_leaf"]),
        seed=doc.get("seed"),
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    """4x4 counts; rows are true classes, columns predictions."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (N_CLASSES, N_CLASSES) or (counts < 0).any():
            raise DataContractError("confusion counts must be a nonnegative 4x4 matrix")

    def row_percentages(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            pct = np.where(totals > 0, 100.0 * self.counts / np.maximum(totals, 1), 0.0)
        return pct

    def percentage(self, true: LimbClass, predicted: LimbClass) -> float:
        pct = self.row_percentages()
        return float(pct[CLASS_ORDER.index(true), CLASS_ORDER.index(predicted)])

    def format_table(self) -> str:
        """Percentage table in report order: Arms, Feet, Legs, Base."""
        from .body import CLASS_REPORT_ORDER

        pct = self.row_percentages()
        names = [c.value.capitalize() for c in CLASS_REPORT_ORDER]
        head = "true\\pred".ljust(10) + "".join(f"{n:>8}" for n in names)
        lines = [head]
        for c_true in CLASS_REPORT_ORDER:
            i = CLASS_ORDER.index(c_true)
            row = c_true.value.capitalize().ljust(10)
            for c_pred in CLASS_REPORT_ORDER:
                j = CLASS_ORDER.index(c_pred)
                row += f"{pct[i, j]:>8.1f}"
            lines.append(row)
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        from .body import CLASS_REPORT_ORDER

        pct = self.row_percentages()
        names = [c.value for c in CLASS_REPORT_ORDER]
        lines = ["true_class," + ",".join(names)]
        for c_true in CLASS_REPORT_ORDER:
            i = CLASS_ORDER.index(c_true)
            cells = [
                repr(float(pct[i, CLASS_ORDER.index(c_pred)]))
                for c_pred in CLASS_REPORT_ORDER
            ]
            lines.append(c_true.value + "," + ",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def evaluate_confusion(tree: DecisionTree, validation: list[FeatureSample]) -> ConfusionMatrix:
    """Counts of (true, predicted) pairs over a labeled validation set."""
    if not validation:
        raise DataContractError("validation set is empty")
    x, y = feature_matrix(validation)
    predicted = tree.predict_batch(x)
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (y, predicted), 1)
    return ConfusionMatrix(counts=counts)
