"""Per-node estimators of the uncertainty-zone half-width.

All estimators read only node-local statistics (the chosen feature's
column, labels, weights, the optimal threshold and its quality curve)
and return a non-negative half-width in feature units. The tree applies
:func:`clamp_delta` to whatever the estimator returns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .splitter import (
    Criterion,
    QualityCurve,
    SplitChoice,
    best_threshold,
    class_weights,
)

CLAMP_FRACTION = 0.25


class DeltaKind(str, enum.Enum):
    QUALITY_PLATEAU = "quality_plateau"
    CLASS_OVERLAP = "class_overlap"
    GAIN_RATIO = "gain_ratio"
    NODE_BOOTSTRAP = "node_bootstrap"
    MARGIN = "margin"
    # degenerate zone everywhere; the tree then behaves as binary CART
    ZERO = "zero"


@dataclass(frozen=True)
class DeltaMethod:
    kind: DeltaKind = DeltaKind.MARGIN
    epsilon: float = 0.05
    q: float = 0.10
    alpha: float = 0.10
    margin_fallback: str = "half_gap"
    plateau: str = "span"

    def __post_init__(self):
        object.__setattr__(self, "kind", DeltaKind(self.kind))
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 < self.q < 0.5:
            raise ValueError("q must lie in (0, 0.5)")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.margin_fallback not in ("half_gap", "gap"):
            raise ValueError("margin_fallback must be 'half_gap' or 'gap'")
        if self.plateau not in ("span", "contiguous"):
            raise ValueError("plateau must be 'span' or 'contiguous'")

    @property
    def name(self) -> str:
        return self.kind.value

    def estimate(self, ctx: "NodeContext", criterion=Criterion.GINI, seed=None) -> float:
        """Raw (unclamped) half-width for this node."""
        k = self.kind
        if k is DeltaKind.ZERO:
            return 0.0
        if k is DeltaKind.QUALITY_PLATEAU:
            return delta_quality_plateau(ctx, self.epsilon, self.plateau)
        if k is DeltaKind.CLASS_OVERLAP:
            return delta_class_overlap(ctx, self.q)
        if k is DeltaKind.GAIN_RATIO:
            return delta_gain_ratio(ctx, self.alpha)
        if k is DeltaKind.NODE_BOOTSTRAP:
            return delta_node_bootstrap(ctx, criterion, seed)
        return delta_margin(ctx, fallback=self.margin_fallback)

    def __call__(self, ctx: "NodeContext", criterion=Criterion.GINI, seed=None) -> float:
        return clamp_delta(self.estimate(ctx, criterion, seed), ctx.column_range)


@dataclass(frozen=True, eq=False)
class NodeContext:
    column: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    theta: float
    curve: QualityCurve
    info_gain: float = 0.0
    split_entropy: float = 0.0
    n_classes: int = 2

    @classmethod
    def from_split(cls, X, labels, weights, split: SplitChoice, n_classes: int) -> "NodeContext":
        return cls(
            column=np.asarray(X, dtype=float)[:, split.feature],
            labels=np.asarray(labels, dtype=np.intp),
            weights=np.asarray(weights, dtype=float),
            theta=split.theta,
            curve=split.curve,
            info_gain=split.info_gain,
            split_entropy=split.split_entropy,
            n_classes=n_classes,
        )

    @property
    def column_range(self) -> float:
        if self.column.size == 0:
            return 0.0
        return float(self.column.max() - self.column.min())


def clamp_delta(delta: float, column_range: float) -> float:
    return float(min(delta, CLAMP_FRACTION * column_range))


def delta_quality_plateau(ctx: NodeContext, epsilon: float = 0.05, plateau: str = "span") -> float:
    """Half-width of the set of thresholds scoring within ``1 - epsilon`` of the best.

    ``span`` takes the outermost near-optimal candidates, so isolated
    near-optimal thresholds beyond a dip still widen the plateau.
    ``contiguous`` keeps only the unbroken run around the best candidate.
    """
    curve = ctx.curve
    if curve.empty:
        return 0.0
    scores, best = curve.scores, curve.best_index
    q_star = scores[best]
    if q_star <= 0:
        return 0.0
    floor = (1.0 - epsilon) * q_star
    if plateau == "span":
        near = np.flatnonzero(scores >= floor)
        return float(curve.thresholds[near[-1]] - curve.thresholds[near[0]]) / 2.0
    lo = best
    while lo > 0 and scores[lo - 1] >= floor:
        lo -= 1
    hi = best
    while hi < scores.size - 1 and scores[hi + 1] >= floor:
        hi += 1
    return float(curve.thresholds[hi] - curve.thresholds[lo]) / 2.0


def delta_class_overlap(ctx: NodeContext, q: float = 0.10) -> float:
    keep = ctx.weights > 0
    col, lab = ctx.column[keep], ctx.labels[keep]
    bands = []
    for c in np.unique(lab):
        values = col[lab == c]
        lo, hi = np.quantile(values, [q, 1.0 - q], method="linear")
        bands.append((lo, hi))
    widest = 0.0
    for (lo_a, hi_a), (lo_b, hi_b) in combinations(bands, 2):
        widest = max(widest, min(hi_a, hi_b) - max(lo_a, lo_b))
    return 0.5 * float(widest)


def delta_gain_ratio(ctx: NodeContext, alpha: float = 0.10) -> float:
    gr = ctx.info_gain / ctx.split_entropy if ctx.split_entropy > 0 else 0.0
    return alpha * ctx.column_range / (1.0 + gr)


def bootstrap_rounds(n: int) -> int:
    if n < 2000:
        return 20
    if n < 10000:
        return 15
    return 10


def bootstrap_thresholds(ctx: NodeContext, criterion=Criterion.GINI, seed=None) -> np.ndarray:
    """Optimal thresholds on resamples of the node; degenerate resamples are dropped."""
    n = ctx.column.size
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(bootstrap_rounds(n)):
        idx = rng.integers(0, n, size=n)
        t = best_threshold(ctx.column[idx], ctx.labels[idx], ctx.weights[idx], criterion, ctx.n_classes)
        if t is not None:
            out.append(t)
    return np.asarray(out, dtype=float)


def delta_node_bootstrap(ctx: NodeContext, criterion=Criterion.GINI, seed=None) -> float:
    if ctx.column.size < 2:
        return 0.0
    thetas = bootstrap_thresholds(ctx, criterion, seed)
    if thetas.size < 2:
        return 0.0
    return float(np.std(thetas))


def delta_margin(ctx: NodeContext, fallback: str = "half_gap") -> float:
    """Distance from the threshold to the nearest cross-class example.

    The dominant class on each side is the weighted majority (ties to the
    lower class index). A clean split falls back to the empty gap that
    straddles the threshold.
    """
    col, lab, theta = ctx.column, ctx.labels, ctx.theta
    go_left = col <= theta
    if not go_left.any() or go_left.all():
        return 0.0
    c_left = int(np.argmax(class_weights(lab[go_left], ctx.weights[go_left], ctx.n_classes)))
    c_right = int(np.argmax(class_weights(lab[~go_left], ctx.weights[~go_left], ctx.n_classes)))

    dists = []
    intruders = ~go_left & (lab == c_left)
    if intruders.any():
        dists.append(np.min(col[intruders] - theta))
    intruders = go_left & (lab == c_right)
    if intruders.any():
        dists.append(np.min(theta - col[intruders]))
    if dists:
        return float(min(dists))

    gap = float(col[~go_left].min() - col[go_left].max())
    return gap / 2.0 if fallback == "half_gap" else gap


def get_method(spec) -> DeltaMethod:
    if isinstance(spec, DeltaMethod):
        return spec
    return DeltaMethod(DeltaKind(spec))


def node_seed(root: int, node_id: int) -> np.random.SeedSequence:
    """Independent rng stream per (root seed, preorder node id)."""
    return np.random.SeedSequence([int(root), int(node_id)])
