"""Growing ternary CART trees.

Two architectures share the splitter and the delta estimators:

``BINARY_TERNARY``
    grown exactly like binary CART; each split stores its half-width
    for use at prediction time only.
``TRINARY``
    in-zone training examples grow a separate middle subtree while the
    left and right subtrees see only the examples outside the zone.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .core import ClassDistribution
from .delta import DeltaKind, DeltaMethod, NodeContext, get_method, node_seed
from .splitter import Criterion, best_split, class_weights

FORMAT_TAG = "ternary-cart/1"


class Architecture(str, enum.Enum):
    BINARY_TERNARY = "binary_ternary"
    TRINARY = "trinary"


@dataclass(frozen=True)
class FitParams:
    max_depth: int = 4
    criterion: Criterion = Criterion.GINI
    delta_method: DeltaMethod = field(default_factory=DeltaMethod)
    architecture: Architecture = Architecture.BINARY_TERNARY
    seed: int = 42

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "delta_method", get_method(self.delta_method))

    def to_dict(self) -> dict:
        m = self.delta_method
        return {
            "max_depth": self.max_depth,
            "criterion": self.criterion.value,
            "architecture": self.architecture.value,
            "seed": self.seed,
            "delta_method": {
                "kind": m.kind.value,
                "epsilon": m.epsilon,
                "q": m.q,
                "alpha": m.alpha,
                "margin_fallback": m.margin_fallback,
                "plateau": m.plateau,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitParams":
        return cls(
            max_depth=d["max_depth"],
            criterion=d["criterion"],
            architecture=d["architecture"],
            seed=d["seed"],
            delta_method=DeltaMethod(**d["delta_method"]),
        )


@dataclass(frozen=True, eq=False)
class Leaf:
    dist: ClassDistribution
    n: int

    @property
    def is_leaf(self) -> bool:
        return True


@dataclass(frozen=True, eq=False)
class Split:
    feature: int
    theta: float
    delta: float
    left: "TreeNode"
    right: "TreeNode"
    middle: Optional["TreeNode"] = None
    n: int = 0

    @property
    def is_leaf(self) -> bool:
        return False

    def children(self):
        out = [self.left]
        if self.middle is not None:
            out.append(self.middle)
        out.append(self.right)
        return out


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True, eq=False)
class FittedTree:
    root: TreeNode
    n_classes: int
    n_features: int
    params: FitParams

    @property
    def architecture(self) -> Architecture:
        return self.params.architecture

    def nodes(self):
        """Preorder traversal (left, middle, right)."""
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            if not node.is_leaf:
                stack.extend((c, depth + 1) for c in reversed(node.children()))

    @property
    def depth(self) -> int:
        return max(d for _, d in self.nodes())

    @property
    def n_leaves(self) -> int:
        return sum(1 for node, _ in self.nodes() if node.is_leaf)

    def to_json(self) -> str:
        return tree_to_json(self)

    @classmethod
    def from_json(cls, text: str) -> "FittedTree":
        return tree_from_json(text)


def leaf_distribution(labels, weights, n_classes: int) -> ClassDistribution:
    """Weighted class frequencies, normalised."""
    if weights is None:
        weights = np.ones(len(labels))
    return ClassDistribution.from_weights(class_weights(labels, weights, n_classes))


class _Grower:
    def __init__(self, X, y, w, n_classes, params: FitParams):
        self.X, self.y, self.w = X, y, w
        self.k = n_classes
        self.params = params
        self.next_id = 0

    def grow(self, idx: np.ndarray, depth: int, parent: ClassDistribution) -> TreeNode:
        node_id = self.next_id
        self.next_id += 1
        y, w = self.y[idx], self.w[idx]
        counts = class_weights(y, w, self.k)
        dist = ClassDistribution.from_weights(counts) if counts.sum() > 0 else parent
        if depth >= self.params.max_depth or idx.size < 2 or np.count_nonzero(counts) <= 1:
            return Leaf(dist, int(idx.size))

        Xn = self.X[idx]
        split = best_split(Xn, y, w, self.params.criterion, self.k)
        if split is None:
            return Leaf(dist, int(idx.size))

        ctx = NodeContext.from_split(Xn, y, w, split, self.k)
        delta = self.params.delta_method(ctx, self.params.criterion, node_seed(self.params.seed, node_id))
        x = ctx.column

        if self.params.architecture is Architecture.BINARY_TERNARY:
            go_left = x <= split.theta
            left = self.grow(idx[go_left], depth + 1, dist)
            right = self.grow(idx[~go_left], depth + 1, dist)
            return Split(split.feature, split.theta, delta, left, right, None, int(idx.size))

        lo, hi = split.theta - delta, split.theta + delta
        go_left = x <= lo
        go_right = x > hi
        in_zone = ~(go_left | go_right)
        left = self.grow(idx[go_left], depth + 1, dist) if go_left.any() else self._stub(dist)
        middle = self.grow(idx[in_zone], depth + 1, dist) if in_zone.any() else None
        right = self.grow(idx[go_right], depth + 1, dist) if go_right.any() else self._stub(dist)
        return Split(split.feature, split.theta, delta, left, right, middle, int(idx.size))

    def _stub(self, dist: ClassDistribution) -> Leaf:
        # zone swallowed this side: keep the ids in preorder all the same
        self.next_id += 1
        return Leaf(dist, 0)


def fit(X, y, params: Optional[FitParams] = None, weights=None, n_classes: Optional[int] = None) -> FittedTree:
    """Grow a tree on ``X`` (n x d) with integer labels ``y``."""
    params = params or FitParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.intp)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    if y.shape[0] != X.shape[0]:
        raise ValueError("X and y have different numbers of rows")
    w = np.ones(X.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("sample weights must be non-negative")
    # an inferred schema is at least binary so single-class data still fits a leaf
    k = int(n_classes) if n_classes is not None else max(2, int(y.max()) + 1)
    if k < 2:
        raise ValueError("need at least two classes in the label schema")
    if y.min() < 0 or y.max() >= k:
        raise ValueError("labels must lie in [0, n_classes)")

    grower = _Grower(X, y, w, k, params)
    prior = leaf_distribution(y, w, k)
    root = grower.grow(np.arange(X.shape[0]), 0, prior)
    return FittedTree(root, k, X.shape[1], params)


def fit_dataset(dataset, params: Optional[FitParams] = None) -> FittedTree:
    return fit(dataset.features, dataset.labels, params, dataset.weights, dataset.n_classes)


def with_zero_delta(params: FitParams) -> FitParams:
    return replace(params, delta_method=DeltaMethod(DeltaKind.ZERO))


# -- canonical JSON ------------------------------------------------------------

def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"type": "leaf", "n": node.n, "probs": [float(p) for p in node.dist.probs]}
    d = {
        "type": "split",
        "feature": int(node.feature),
        "theta": float(node.theta),
        "delta": float(node.delta),
        "n": node.n,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }
    if node.middle is not None:
        d["middle"] = _node_to_dict(node.middle)
    return d


def _node_from_dict(d: dict) -> TreeNode:
    if d["type"] == "leaf":
        return Leaf(ClassDistribution(np.array(d["probs"], dtype=float)), int(d["n"]))
    return Split(
        feature=int(d["feature"]),
        theta=float(d["theta"]),
        delta=float(d["delta"]),
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
        middle=_node_from_dict(d["middle"]) if "middle" in d else None,
        n=int(d["n"]),
    )


def tree_to_dict(tree: FittedTree) -> dict:
    return {
        "format": FORMAT_TAG,
        "n_classes": tree.n_classes,
        "n_features": tree.n_features,
        "params": tree.params.to_dict(),
        "root": _node_to_dict(tree.root),
    }


def tree_to_json(tree: FittedTree) -> str:
    return json.dumps(tree_to_dict(tree), sort_keys=True, indent=1) + "\n"


def tree_from_json(text: str) -> FittedTree:
    d = json.loads(text)
    if d.get("format") != FORMAT_TAG:
        raise ValueError(f"not a {FORMAT_TAG} document")
    return FittedTree(
        root=_node_from_dict(d["root"]),
        n_classes=int(d["n_classes"]),
        n_features=int(d["n_features"]),
        params=FitParams.from_dict(d["params"]),
    )
