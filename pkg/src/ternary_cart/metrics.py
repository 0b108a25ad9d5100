"""Evaluation metrics for ternary verdicts and paired comparison statistics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm, rankdata

from .core import Ternary

PRACTICAL_THRESHOLD = 0.005
EXACT_MAX_N = 25


class UndefinedMetricError(ValueError):
    """A ratio metric was requested where its denominator vanishes."""


@dataclass(frozen=True)
class MetricsReport:
    dec_acc: float
    undec_rate: float
    acc_all: float
    f1_dec: float
    n: int
    n_undec: int
    n_correct_dec: int
    n_correct_undec: int
    # True when every instance is UNDEC and dec_acc falls back to acc_all
    degenerate: bool = False

    @property
    def acc_u(self) -> Optional[float]:
        """Measured accuracy on UNDEC instances (None when there are none)."""
        if self.n_undec == 0:
            return None
        return self.n_correct_undec / self.n_undec

    def to_dict(self) -> dict:
        d = asdict(self)
        d["acc_u"] = self.acc_u
        return d


def macro_f1(y_true, y_pred) -> float:
    """Macro-F1 over the classes present in ``y_true``."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    classes = np.unique(y_true)
    if classes.size == 0:
        return 0.0
    scores = []
    for c in classes:
        tp = np.sum((y_true == c) & (y_pred == c))
        fp = np.sum((y_true != c) & (y_pred == c))
        fn = np.sum((y_true == c) & (y_pred != c))
        scores.append(2.0 * tp / (2.0 * tp + fp + fn))
    return float(np.mean(scores))


def compute_metrics(predictions, true_labels, n_classes: Optional[int] = None) -> MetricsReport:
    """Decided accuracy, boundary-uncertain rate, overall accuracy and decided F1.

    ``predictions`` is a :class:`~ternary_cart.predict.PredictionBatch` or
    a sequence of :class:`~ternary_cart.predict.Prediction`.
    """
    if hasattr(predictions, "verdicts"):
        pred_labels = np.asarray(predictions.labels)
        undec = np.asarray(predictions.verdicts) == Ternary.UNDEC
    else:
        pred_labels = np.array([p.label for p in predictions])
        undec = np.array([p.verdict == Ternary.UNDEC for p in predictions], dtype=bool)
    y = np.asarray(true_labels)
    if y.shape[0] != pred_labels.shape[0]:
        raise ValueError("predictions and labels differ in length")
    n = y.shape[0]
    if n == 0:
        raise ValueError("cannot evaluate zero instances")

    correct = pred_labels == y
    n_undec = int(undec.sum())
    n_dec = n - n_undec
    n_correct_dec = int(correct[~undec].sum())
    n_correct_undec = int(correct[undec].sum())
    acc_all = (n_correct_dec + n_correct_undec) / n
    degenerate = n_dec == 0
    dec_acc = acc_all if degenerate else n_correct_dec / n_dec
    f1 = macro_f1(y[~undec], pred_labels[~undec]) if n_dec else 0.0
    return MetricsReport(
        dec_acc=dec_acc,
        undec_rate=n_undec / n,
        acc_all=acc_all,
        f1_dec=f1,
        n=n,
        n_undec=n_undec,
        n_correct_dec=n_correct_dec,
        n_correct_undec=n_correct_undec,
        degenerate=degenerate,
    )


def decomposition_residual(report: MetricsReport) -> float:
    """``acc_all - [(1 - u) dec_acc + u acc_u]`` from the recorded counts."""
    u = report.undec_rate
    acc_u = report.acc_u if report.acc_u is not None else 0.0
    dec = 0.0 if report.degenerate else report.dec_acc
    return report.acc_all - ((1.0 - u) * dec + u * acc_u)


def recover_uncertain_accuracy(acc_all: float, dec_acc: float, u: float) -> float:
    if not 0.0 < u <= 1.0:
        raise UndefinedMetricError("uncertain accuracy needs a boundary-uncertain rate in (0, 1]")
    return (acc_all - (1.0 - u) * dec_acc) / u


def efficiency(dec_acc: float, baseline_acc: float, u: float) -> float:
    """Decided-accuracy gain over the baseline per unit of boundary-uncertain rate."""
    if not u > 0:
        raise UndefinedMetricError("efficiency is undefined when nothing is flagged")
    return (dec_acc - baseline_acc) / u


def ub_ratio(undec_rate: float, bayes_error: float) -> float:
    if not bayes_error > 0:
        raise ValueError("Bayes error must be positive")
    return undec_rate / bayes_error


# -- paired statistics -----------------------------------------------------------

@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    statistic: float  # W+, sum of ranks of positive differences
    n: int            # non-zero differences used
    exact: bool
    degenerate: bool = False


def _exact_upper_tail(ranks: np.ndarray, w_plus: float) -> float:
    # ranks are multiples of 1/2 (average ranks); count sign patterns on doubled ranks
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    target = int(np.rint(2 * w_plus))
    return float(sum(counts[target:]) / 2 ** len(doubled))


def wilcoxon_one_sided(diffs: Iterable[float]) -> WilcoxonResult:
    """Signed-rank test of H1: median difference > 0.

    Zero differences are dropped. Exact null distribution for up to 25
    non-zero differences, otherwise the normal approximation with tie and
    continuity corrections.
    """
    d = np.asarray(list(diffs), dtype=float)
    d = d[d != 0]
    n = d.size
    if n == 0:
        return WilcoxonResult(1.0, 0.0, 0, True, degenerate=True)
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_N:
        return WilcoxonResult(_exact_upper_tail(ranks, w_plus), w_plus, n, True)

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts ** 3 - tie_counts) / 48.0
    z = (w_plus - mean - 0.5) / math.sqrt(var)
    return WilcoxonResult(float(norm.sf(z)), w_plus, n, False)


@dataclass(frozen=True)
class PairedResult:
    p_value: float
    wins: int
    ties: int
    losses: int
    n: int
    degenerate: bool = False


def win_tie_loss(pairs: Sequence[Tuple[float, float]], threshold: float = PRACTICAL_THRESHOLD):
    """Count wins/ties/losses of method over baseline beyond ``threshold``."""
    wins = ties = losses = 0
    for method_acc, base_acc in pairs:
        diff = method_acc - base_acc
        if diff > threshold:
            wins += 1
        elif diff < -threshold:
            losses += 1
        else:
            ties += 1
    return wins, ties, losses


def paired_comparison(method_scores, baseline_scores, threshold: float = PRACTICAL_THRESHOLD) -> PairedResult:
    pairs = list(zip(method_scores, baseline_scores))
    w, t, l = win_tie_loss(pairs, threshold)
    test = wilcoxon_one_sided(m - b for m, b in pairs)
    return PairedResult(test.p_value, w, t, l, len(pairs), test.degenerate)
