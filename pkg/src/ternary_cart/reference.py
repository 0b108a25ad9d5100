"""Plain binary CART used as the baseline and as an equivalence oracle.

Deliberately independent of :mod:`ternary_cart.splitter`: every candidate
threshold is scored by explicit masking instead of a cumulative sweep.
Only the conventions are shared (midpoint thresholds, ``x <= theta`` goes
left, lowest feature then lowest threshold wins a tie, no split without
positive gain).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

TIE_TOL = 1e-12


def _impurity(counts: np.ndarray, criterion: str) -> np.ndarray:
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts), where=total > 0)
    if criterion == "gini":
        return 1.0 - (p ** 2).sum(axis=-1)
    logs = np.log2(p, out=np.zeros_like(p), where=p > 0)
    return -(p * logs).sum(axis=-1)


@dataclass
class RefNode:
    probs: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: Optional["RefNode"] = None
    right: Optional["RefNode"] = None


class ReferenceCART:
    """Greedy depth-limited CART classifier with brute-force split search."""

    def __init__(self, max_depth: int = 4, criterion: str = "gini"):
        self.max_depth = max_depth
        self.criterion = getattr(criterion, "value", criterion)
        self.root: Optional[RefNode] = None

    def fit(self, X, y, sample_weight=None, n_classes=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.intp)
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        self.n_classes_ = int(n_classes) if n_classes is not None else int(y.max()) + 1
        onehot = np.zeros((len(y), self.n_classes_))
        onehot[np.arange(len(y)), y] = w
        prior = onehot.sum(axis=0) / onehot.sum()
        self.root = self._build(X, onehot, 0, prior)
        return self

    def _best(self, X, onehot):
        parent = onehot.sum(axis=0)
        w_all = parent.sum()
        base = _impurity(parent, self.criterion)
        best = (TIE_TOL, None, None)
        for f in range(X.shape[1]):
            values = np.unique(X[:, f])
            if values.size < 2:
                continue
            lo, hi = values[:-1], values[1:]
            cand = lo / 2.0 + hi / 2.0
            cand = np.where(cand >= hi, lo, cand)
            masks = (X[:, f][None, :] <= cand[:, None]).astype(float)
            left = masks @ onehot
            right = parent[None, :] - left
            wl, wr = left.sum(axis=1), right.sum(axis=1)
            gain = base - (wl * _impurity(left, self.criterion) + wr * _impurity(right, self.criterion)) / w_all
            top = gain.max()
            j = int(np.flatnonzero(gain >= top - TIE_TOL)[0])
            slack = TIE_TOL if best[1] is not None else 0.0
            if gain[j] > best[0] + slack:
                best = (gain[j], f, cand[j])
        return best[1], best[2]

    def _build(self, X, onehot, depth, parent_probs):
        counts = onehot.sum(axis=0)
        probs = counts / counts.sum() if counts.sum() > 0 else parent_probs
        node = RefNode(probs)
        if depth >= self.max_depth or len(X) < 2 or np.count_nonzero(counts) <= 1:
            return node
        f, t = self._best(X, onehot)
        if f is None:
            return node
        go_left = X[:, f] <= t
        node.feature, node.threshold = f, t
        node.left = self._build(X[go_left], onehot[go_left], depth + 1, probs)
        node.right = self._build(X[~go_left], onehot[~go_left], depth + 1, probs)
        return node

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty((len(X), self.n_classes_))
        for i, x in enumerate(X):
            node = self.root
            while node.left is not None:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = node.probs
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
