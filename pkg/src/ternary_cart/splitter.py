"""CART split search: impurities, candidate thresholds and quality curves.

Every split is evaluated in gain form (parent impurity minus the
weighted mean child impurity) with a single sorted sweep per feature.
Samples with ``x <= theta`` go left, the rest go right.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

# Scores closer than this are treated as tied; ties go to the lowest index.
TIE_TOL = 1e-12


class Criterion(str, enum.Enum):
    GINI = "gini"
    INFO_GAIN = "entropy"


class EmptyNodeError(ValueError):
    """Raised when an impurity is requested for a node with no weight."""


def class_weights(labels, weights, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.intp)
    weights = np.asarray(weights, dtype=float)
    return np.bincount(labels, weights=weights, minlength=n_classes).astype(float)


def _gini_from_counts(counts: np.ndarray) -> np.ndarray:
    total = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / total[..., None]
        g = 1.0 - np.sum(p * p, axis=-1)
    return np.where(total > 0, g, 0.0)


def _entropy_from_counts(counts: np.ndarray) -> np.ndarray:
    total = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / total[..., None]
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return np.where(total > 0, terms.sum(axis=-1), 0.0)


def _impurity_fn(criterion: Criterion):
    return _gini_from_counts if Criterion(criterion) is Criterion.GINI else _entropy_from_counts


def _infer_k(labels, n_classes):
    if n_classes is not None:
        return int(n_classes)
    labels = np.asarray(labels)
    return max(int(labels.max()) + 1 if labels.size else 0, 2)


def gini_impurity(labels, weights=None, n_classes: Optional[int] = None) -> float:
    """Weighted Gini impurity ``1 - sum_k p_k**2``."""
    labels = np.asarray(labels, dtype=np.intp)
    if weights is None:
        weights = np.ones(labels.shape[0])
    counts = class_weights(labels, weights, _infer_k(labels, n_classes))
    if counts.sum() <= 0:
        raise EmptyNodeError("impurity of a node with zero total weight")
    return float(_gini_from_counts(counts))


def entropy(labels, weights=None, n_classes: Optional[int] = None) -> float:
    """Weighted Shannon entropy in bits."""
    labels = np.asarray(labels, dtype=np.intp)
    if weights is None:
        weights = np.ones(labels.shape[0])
    counts = class_weights(labels, weights, _infer_k(labels, n_classes))
    if counts.sum() <= 0:
        raise EmptyNodeError("impurity of a node with zero total weight")
    return float(_entropy_from_counts(counts))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def _midpoints(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = lo / 2.0 + hi / 2.0
    # adjacent floats can round the midpoint up onto the right value
    return np.where(mid >= hi, lo, mid)


def candidate_thresholds(column) -> np.ndarray:
    """Midpoints between consecutive distinct sorted values."""
    values = np.unique(np.asarray(column, dtype=float))
    if values.size < 2:
        return np.empty(0)
    return _midpoints(values[:-1], values[1:])


@dataclass(frozen=True, eq=False)
class QualityCurve:
    thresholds: np.ndarray
    scores: np.ndarray
    best_index: int

    def __len__(self):
        return self.thresholds.size

    @property
    def empty(self) -> bool:
        return self.thresholds.size == 0

    @property
    def best_threshold(self) -> float:
        return float(self.thresholds[self.best_index])

    @property
    def best_score(self) -> float:
        return float(self.scores[self.best_index])


EMPTY_CURVE = QualityCurve(np.empty(0), np.empty(0), -1)


def first_argmax(scores: np.ndarray) -> int:
    top = scores.max()
    return int(np.flatnonzero(scores >= top - TIE_TOL)[0])


@dataclass
class _Sweep:
    thresholds: np.ndarray
    left: np.ndarray   # (T, K) class weight left of each threshold
    total: np.ndarray  # (K,)


def _sweep(column, labels, weights, n_classes) -> _Sweep:
    column = np.asarray(column, dtype=float)
    order = np.argsort(column, kind="stable")
    xs = column[order]
    onehot = np.zeros((xs.size, n_classes))
    onehot[np.arange(xs.size), np.asarray(labels, dtype=np.intp)[order]] = np.asarray(weights, dtype=float)[order]
    cum = np.cumsum(onehot, axis=0)
    cut = np.flatnonzero(xs[:-1] < xs[1:])
    return _Sweep(_midpoints(xs[cut], xs[cut + 1]), cum[cut], cum[-1] if xs.size else np.zeros(n_classes))


def _gains(sw: _Sweep, criterion: Criterion) -> np.ndarray:
    imp = _impurity_fn(criterion)
    right = sw.total[None, :] - sw.left
    w_left = sw.left.sum(axis=1)
    w_right = right.sum(axis=1)
    w_all = sw.total.sum()
    child = (w_left * imp(sw.left) + w_right * imp(right)) / w_all
    return np.maximum(imp(sw.total) - child, 0.0)


def evaluate_split_curve(column, labels, weights=None, criterion=Criterion.GINI,
                         n_classes: Optional[int] = None) -> QualityCurve:
    """Gain at every candidate threshold of one feature column."""
    labels = np.asarray(labels, dtype=np.intp)
    if weights is None:
        weights = np.ones(labels.shape[0])
    k = _infer_k(labels, n_classes)
    sw = _sweep(column, labels, weights, k)
    if sw.thresholds.size == 0 or sw.total.sum() <= 0:
        return EMPTY_CURVE
    scores = _gains(sw, criterion)
    return QualityCurve(sw.thresholds, scores, first_argmax(scores))


def best_threshold(column, labels, weights=None, criterion=Criterion.GINI,
                   n_classes: Optional[int] = None) -> Optional[float]:
    """Optimal threshold on one column, or None if no split has positive gain."""
    curve = evaluate_split_curve(column, labels, weights, criterion, n_classes)
    if curve.empty or curve.best_score <= TIE_TOL:
        return None
    return curve.best_threshold


@dataclass(frozen=True, eq=False)
class SplitChoice:
    feature: int
    theta: float
    gain: float
    info_gain: float
    split_entropy: float
    curve: QualityCurve


def split_statistics(column, labels, weights, theta: float, n_classes: int):
    """Information gain (bits) and binary split entropy at ``theta``."""
    column = np.asarray(column, dtype=float)
    go_left = column <= theta
    parent = class_weights(labels, weights, n_classes)
    left = class_weights(np.asarray(labels)[go_left], np.asarray(weights)[go_left], n_classes)
    right = parent - left
    w = parent.sum()
    wl, wr = left.sum(), right.sum()
    ig = _entropy_from_counts(parent) - (wl * _entropy_from_counts(left) + wr * _entropy_from_counts(right)) / w
    return max(float(ig), 0.0), binary_entropy(wl / w)


def best_split(X, labels, weights=None, criterion=Criterion.GINI,
               n_classes: Optional[int] = None) -> Optional[SplitChoice]:
    """Best (feature, threshold) over all columns of ``X``.

    Ties go to the lower feature index, then the lower threshold. Returns
    None when fewer than two samples are present or no split has a
    positive gain.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=np.intp)
    if weights is None:
        weights = np.ones(labels.shape[0])
    weights = np.asarray(weights, dtype=float)
    if X.shape[0] < 2:
        return None
    k = _infer_k(labels, n_classes)

    best_f, best_curve, best_gain = -1, None, TIE_TOL
    for f in range(X.shape[1]):
        curve = evaluate_split_curve(X[:, f], labels, weights, criterion, k)
        if curve.empty:
            continue
        if curve.best_score > best_gain + (TIE_TOL if best_curve is not None else 0.0):
            best_f, best_curve, best_gain = f, curve, curve.best_score
    if best_curve is None:
        return None
    theta = best_curve.best_threshold
    ig, h_split = split_statistics(X[:, best_f], labels, weights, theta, k)
    return SplitChoice(best_f, theta, best_curve.best_score, ig, h_split, best_curve)
