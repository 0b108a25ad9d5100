"""Prediction modes and ternary verdicts.

* probabilistic: inside a zone both children are evaluated and blended
  with distance weights; the instance is boundary-uncertain.
* hard_middle: single-path descent through a TRINARY tree; entering a
  middle branch makes the instance boundary-uncertain.
* deferred: blend at the first zone only, using plain binary routing in
  both child subtrees.
* binary: zones ignored altogether (the CART view of the same tree).

Each mode has a scalar implementation that follows the definitions
literally and a vectorised batch implementation used for evaluation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import ClassDistribution, Ternary, ZoneParams, ternary_all, zone_classify
from .tree import Architecture, FittedTree, TreeNode


class RoutingMode(str, enum.Enum):
    PROBABILISTIC = "probabilistic"
    HARD_MIDDLE = "hard_middle"
    DEFERRED = "deferred"
    BINARY = "binary"


DEFAULT_MODE = {
    Architecture.BINARY_TERNARY: RoutingMode.PROBABILISTIC,
    Architecture.TRINARY: RoutingMode.HARD_MIDDLE,
}

_ALLOWED = {
    RoutingMode.PROBABILISTIC: {Architecture.BINARY_TERNARY},
    RoutingMode.DEFERRED: {Architecture.BINARY_TERNARY},
    RoutingMode.HARD_MIDDLE: {Architecture.TRINARY},
    RoutingMode.BINARY: {Architecture.BINARY_TERNARY, Architecture.TRINARY},
}


@dataclass(frozen=True, eq=False)
class Prediction:
    probs: ClassDistribution
    verdict: Ternary
    label: int


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    probs: np.ndarray     # (m, K)
    verdicts: np.ndarray  # (m,) int8, 1 = TRUE, 0 = UNDEC
    labels: np.ndarray    # (m,)

    def __len__(self):
        return self.labels.shape[0]

    def __getitem__(self, i) -> Prediction:
        return Prediction(ClassDistribution(self.probs[i]), Ternary(int(self.verdicts[i])), int(self.labels[i]))

    @property
    def undecided(self) -> np.ndarray:
        return self.verdicts == Ternary.UNDEC


def blend_weights(x: float, theta: float, delta: float):
    """Left/right weights for an in-zone value: ``w_L = (theta + delta - x) / (2 delta)``."""
    if not delta > 0 or not (theta - delta < x <= theta + delta):
        raise ValueError(f"x={x!r} is not inside the zone ({theta - delta!r}, {theta + delta!r}]")
    w_left = (theta + delta - x) / (2.0 * delta)
    return w_left, 1.0 - w_left


def _check_mode(tree: FittedTree, mode) -> RoutingMode:
    mode = DEFAULT_MODE[tree.architecture] if mode is None else RoutingMode(mode)
    if tree.architecture not in _ALLOWED[mode]:
        raise ValueError(f"{mode.value} routing is not defined for {tree.architecture.value} trees")
    return mode


def _check_row(tree: FittedTree, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != tree.n_features:
        raise ValueError(f"expected a feature vector of length {tree.n_features}, got shape {x.shape}")
    return x


def _finish(p: np.ndarray, undecided: bool) -> Prediction:
    dist = ClassDistribution(p)
    return Prediction(dist, Ternary.UNDEC if undecided else Ternary.TRUE, dist.argmax())


# -- scalar descent -------------------------------------------------------------

def _binary_one(node: TreeNode, x) -> np.ndarray:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.theta else node.right
    return node.dist.probs


def _prob_one(node: TreeNode, x):
    if node.is_leaf:
        return node.dist.probs, False
    zone = zone_classify(x[node.feature], ZoneParams(node.theta, node.delta))
    if zone is Ternary.FALSE:
        return _prob_one(node.left, x)
    if zone is Ternary.TRUE:
        return _prob_one(node.right, x)
    w_left, w_right = blend_weights(x[node.feature], node.theta, node.delta)
    p_left, _ = _prob_one(node.left, x)
    p_right, _ = _prob_one(node.right, x)
    return w_left * p_left + w_right * p_right, True


def _deferred_one(node: TreeNode, x):
    while not node.is_leaf:
        zone = zone_classify(x[node.feature], ZoneParams(node.theta, node.delta))
        if zone is Ternary.UNDEC:
            w_left, w_right = blend_weights(x[node.feature], node.theta, node.delta)
            return w_left * _binary_one(node.left, x) + w_right * _binary_one(node.right, x), True
        node = node.right if zone is Ternary.TRUE else node.left
    return node.dist.probs, False


def _hard_middle_one(node: TreeNode, x):
    undecided = False
    while not node.is_leaf:
        v = x[node.feature]
        zone = zone_classify(v, ZoneParams(node.theta, node.delta))
        if zone is Ternary.UNDEC and node.middle is not None:
            node, undecided = node.middle, True
        elif zone is Ternary.UNDEC:
            node = node.left if v <= node.theta else node.right
        else:
            node = node.right if zone is Ternary.TRUE else node.left
    return node.dist.probs, undecided


def predict_probabilistic(tree: FittedTree, x) -> Prediction:
    _check_mode(tree, RoutingMode.PROBABILISTIC)
    return _finish(*_prob_one(tree.root, _check_row(tree, x)))


def predict_deferred(tree: FittedTree, x) -> Prediction:
    _check_mode(tree, RoutingMode.DEFERRED)
    return _finish(*_deferred_one(tree.root, _check_row(tree, x)))


def predict_hard_middle(tree: FittedTree, x) -> Prediction:
    _check_mode(tree, RoutingMode.HARD_MIDDLE)
    return _finish(*_hard_middle_one(tree.root, _check_row(tree, x)))


def predict_binary(tree: FittedTree, x) -> Prediction:
    return _finish(_binary_one(tree.root, _check_row(tree, x)), False)


def predict_one(tree: FittedTree, x, mode=None) -> Prediction:
    mode = _check_mode(tree, mode)
    return {
        RoutingMode.PROBABILISTIC: predict_probabilistic,
        RoutingMode.DEFERRED: predict_deferred,
        RoutingMode.HARD_MIDDLE: predict_hard_middle,
        RoutingMode.BINARY: predict_binary,
    }[mode](tree, x)


def zone_trace(tree: FittedTree, x, mode=None) -> List[Ternary]:
    """Zone value at every split node on the paths that contribute to the output.

    In probabilistic mode an in-zone node contributes both children. Under
    hard-middle routing a zone hit without a middle child is reported as
    decisive, since that node routes by the sign of ``x - theta``.
    """
    mode = _check_mode(tree, mode)
    x = _check_row(tree, x)
    out: List[Ternary] = []

    def walk(node, zones_on):
        if node.is_leaf:
            return
        v = x[node.feature]
        zone = zone_classify(v, ZoneParams(node.theta, node.delta)) if zones_on else (
            Ternary.FALSE if v <= node.theta else Ternary.TRUE)
        if mode is RoutingMode.HARD_MIDDLE and zone is Ternary.UNDEC:
            if node.middle is not None:
                out.append(zone)
                return walk(node.middle, zones_on)
            zone = Ternary.FALSE if v <= node.theta else Ternary.TRUE
        out.append(zone)
        if zone is Ternary.UNDEC:
            below = mode is not RoutingMode.DEFERRED
            walk(node.left, below)
            walk(node.right, below)
        else:
            walk(node.right if zone is Ternary.TRUE else node.left, zones_on)

    walk(tree.root, mode is not RoutingMode.BINARY)
    return out


def verdict_from_trace(trace: List[Ternary]) -> Ternary:
    """Fold the Kleene AND over per-node decisiveness (decisive -> TRUE)."""
    return ternary_all(Ternary.UNDEC if z is Ternary.UNDEC else Ternary.TRUE for z in trace)


# -- batch descent ---------------------------------------------------------------

def _leaf_block(node, m):
    return np.broadcast_to(node.dist.probs, (m, node.dist.n_classes)), np.zeros(m, dtype=bool)


def _binary_batch(node: TreeNode, X: np.ndarray):
    if node.is_leaf:
        return _leaf_block(node, X.shape[0])
    go_left = X[:, node.feature] <= node.theta
    P = np.empty((X.shape[0], node_k(node)))
    P[go_left] = _binary_batch(node.left, X[go_left])[0]
    P[~go_left] = _binary_batch(node.right, X[~go_left])[0]
    return P, np.zeros(X.shape[0], dtype=bool)


def node_k(node: TreeNode) -> int:
    while not node.is_leaf:
        node = node.left
    return node.dist.n_classes


def _blend_batch(node, X, child_fn):
    x = X[:, node.feature]
    lo, hi = node.theta - node.delta, node.theta + node.delta
    go_left = x <= lo
    go_right = x > hi
    in_zone = ~(go_left | go_right)
    w_left = np.where(go_left, 1.0, 0.0)
    if in_zone.any():
        w_left[in_zone] = (hi - x[in_zone]) / (2.0 * node.delta)
    reach_left = go_left | in_zone
    reach_right = go_right | in_zone

    P = np.zeros((X.shape[0], node_k(node)))
    undec = in_zone.copy()
    P_l, u_l = child_fn(node.left, X[reach_left])
    P_r, u_r = child_fn(node.right, X[reach_right])
    P[reach_left] += w_left[reach_left, None] * P_l
    P[reach_right] += (1.0 - w_left[reach_right])[:, None] * P_r
    undec[reach_left] |= u_l & go_left[reach_left]
    undec[reach_right] |= u_r & go_right[reach_right]
    return P, undec


def _prob_batch(node: TreeNode, X: np.ndarray):
    if node.is_leaf:
        return _leaf_block(node, X.shape[0])
    return _blend_batch(node, X, _prob_batch)


def _deferred_batch(node: TreeNode, X: np.ndarray):
    if node.is_leaf:
        return _leaf_block(node, X.shape[0])
    x = X[:, node.feature]
    decisive_l = x <= node.theta - node.delta
    decisive_r = x > node.theta + node.delta
    in_zone = ~(decisive_l | decisive_r)

    P = np.empty((X.shape[0], node_k(node)))
    undec = np.zeros(X.shape[0], dtype=bool)
    for mask, child in ((decisive_l, node.left), (decisive_r, node.right)):
        P[mask], undec[mask] = _deferred_batch(child, X[mask])
    if in_zone.any():
        Xz = X[in_zone]
        P[in_zone] = _blend_batch(node, Xz, _binary_batch)[0]
        undec[in_zone] = True
    return P, undec


def _hard_middle_batch(node: TreeNode, X: np.ndarray):
    if node.is_leaf:
        return _leaf_block(node, X.shape[0])
    x = X[:, node.feature]
    go_left = x <= node.theta - node.delta
    go_right = x > node.theta + node.delta
    in_zone = ~(go_left | go_right)
    P = np.empty((X.shape[0], node_k(node)))
    undec = np.zeros(X.shape[0], dtype=bool)
    if node.middle is not None:
        if in_zone.any():
            P[in_zone] = _hard_middle_batch(node.middle, X[in_zone])[0]
            undec[in_zone] = True
    else:
        go_left |= in_zone & (x <= node.theta)
        go_right |= in_zone & (x > node.theta)
    for mask, child in ((go_left, node.left), (go_right, node.right)):
        if mask.any():
            P[mask], undec[mask] = _hard_middle_batch(child, X[mask])
    return P, undec


_BATCH = {
    RoutingMode.PROBABILISTIC: _prob_batch,
    RoutingMode.DEFERRED: _deferred_batch,
    RoutingMode.HARD_MIDDLE: _hard_middle_batch,
    RoutingMode.BINARY: _binary_batch,
}


def predict_batch(tree: FittedTree, X, mode: Optional[RoutingMode] = None) -> PredictionBatch:
    """Predict every row of ``X``; ``mode`` defaults to the architecture's own."""
    mode = _check_mode(tree, mode)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise ValueError(f"expected an (m, {tree.n_features}) matrix, got shape {X.shape}")
    P, undec = _BATCH[mode](tree.root, X)
    P = np.array(P, dtype=float)
    verdicts = np.where(undec, Ternary.UNDEC, Ternary.TRUE).astype(np.int8)
    return PredictionBatch(P, verdicts, np.argmax(P, axis=1))
