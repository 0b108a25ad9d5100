import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_small_dataset
from ternary_cart.core import ClassDistribution, Ternary
from ternary_cart.delta import DeltaKind, DeltaMethod
from ternary_cart.predict import (
    RoutingMode,
    blend_weights,
    predict_batch,
    predict_binary,
    predict_deferred,
    predict_hard_middle,
    predict_one,
    predict_probabilistic,
    verdict_from_trace,
    zone_trace,
)
from ternary_cart.reference import ReferenceCART
from ternary_cart.tree import Architecture, FitParams, FittedTree, Leaf, Split, fit

BT = FitParams(architecture=Architecture.BINARY_TERNARY)
TRI = FitParams(architecture=Architecture.TRINARY)


def leaf(*p):
    return Leaf(ClassDistribution(p), 1)


def stump(theta=0.0, delta=1.0, middle=None, params=BT):
    return FittedTree(Split(0, theta, delta, leaf(1, 0), leaf(0, 1), middle, 2), 2, 1, params)


def nested():
    # inner zone (0.5, 1.5] lies inside the root zone (-2, 2]
    inner = Split(0, 1.0, 0.5, leaf(0.2, 0.8), leaf(0, 1), None, 2)
    return FittedTree(Split(0, 0.0, 2.0, leaf(1, 0), inner, None, 4), 2, 1, BT)


class TestBlend:
    @pytest.mark.parametrize("x,theta,delta,expected", [
        (0.0, 0.0, 1.0, (0.5, 0.5)),
        (1.0, 0.0, 1.0, (0.0, 1.0)),
        (-1.0, 0.0, 2.0, (0.75, 0.25)),
    ])
    def test_values(self, x, theta, delta, expected):
        assert blend_weights(x, theta, delta) == pytest.approx(expected)

    @pytest.mark.parametrize("x,delta", [(-1.0, 1.0), (1.5, 1.0), (0.0, 0.0)])
    def test_outside(self, x, delta):
        with pytest.raises(ValueError):
            blend_weights(x, 0.0, delta)


class TestProbabilistic:
    def test_decisive(self):
        p = predict_probabilistic(stump(), [-2.0])
        np.testing.assert_array_equal(p.probs.probs, [1, 0])
        assert p.verdict is Ternary.TRUE and p.label == 0

    def test_centre(self):
        p = predict_probabilistic(stump(), [0.0])
        np.testing.assert_allclose(p.probs.probs, [0.5, 0.5])
        assert p.verdict is Ternary.UNDEC and p.label == 0

    def test_off_centre(self):
        p = predict_probabilistic(stump(), [0.5])
        np.testing.assert_allclose(p.probs.probs, [0.25, 0.75])
        assert p.verdict is Ternary.UNDEC and p.label == 1

    def test_nested_blend(self):
        p = predict_probabilistic(nested(), [1.0])
        # root: w_L = (2 - 1) / 4; inner at centre blends [0.2,0.8] and [0,1] evenly
        inner = 0.5 * np.array([0.2, 0.8]) + 0.5 * np.array([0.0, 1.0])
        np.testing.assert_allclose(p.probs.probs, 0.25 * np.array([1, 0]) + 0.75 * inner)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            predict_probabilistic(stump(), [0.0, 1.0])


class TestHardMiddle:
    def test_middle(self):
        t = stump(middle=leaf(0.6, 0.4), params=TRI)
        p = predict_hard_middle(t, [0.3])
        np.testing.assert_allclose(p.probs.probs, [0.6, 0.4])
        assert p.verdict is Ternary.UNDEC

    def test_decisive_left(self):
        p = predict_hard_middle(stump(middle=leaf(0.6, 0.4), params=TRI), [-3.0])
        np.testing.assert_array_equal(p.probs.probs, [1, 0])
        assert p.verdict is Ternary.TRUE

    def test_zone_without_middle_routes_by_sign(self):
        t = stump(params=TRI)
        assert predict_hard_middle(t, [0.3]).label == 1
        assert predict_hard_middle(t, [-0.3]).label == 0
        assert predict_hard_middle(t, [0.3]).verdict is Ternary.TRUE

    def test_zero_delta_is_binary(self):
        X, y, k = random_small_dataset(4)
        t = fit(X, y, FitParams(delta_method=DeltaMethod(DeltaKind.ZERO), architecture=Architecture.TRINARY),
                n_classes=k)
        b = predict_batch(t, X, RoutingMode.HARD_MIDDLE)
        np.testing.assert_array_equal(b.labels, ReferenceCART(4).fit(X, y, n_classes=k).predict(X))
        assert np.all(b.verdicts == Ternary.TRUE)

    def test_mode_checks(self):
        with pytest.raises(ValueError):
            predict_one(stump(), [0.0], RoutingMode.HARD_MIDDLE)
        with pytest.raises(ValueError):
            predict_one(stump(params=TRI), [0.0], RoutingMode.PROBABILISTIC)


class TestDeferred:
    @pytest.mark.parametrize("x", [-1.5, -0.2, 0.0, 0.7, 1.0, 3.0])
    def test_depth_one_equals_probabilistic(self, x):
        a = predict_deferred(stump(), [x])
        b = predict_probabilistic(stump(), [x])
        np.testing.assert_array_equal(a.probs.probs, b.probs.probs)
        assert a.verdict is b.verdict

    def test_single_zone_on_path(self):
        # x = -1 hits the root zone only; the inner zone is not reached on the right
        t = nested()
        for x in (-1.0, -1.9, 0.3, 2.5):
            np.testing.assert_array_equal(predict_deferred(t, [x]).probs.probs,
                                          predict_probabilistic(t, [x]).probs.probs)

    def test_nested_uses_binary_below(self):
        p = predict_deferred(nested(), [1.0])
        # inner node routes x = 1.0 left by sign
        np.testing.assert_allclose(p.probs.probs, 0.25 * np.array([1, 0]) + 0.75 * np.array([0.2, 0.8]))
        assert p.verdict is Ternary.UNDEC


def test_binary_ignores_zones():
    p = predict_binary(stump(), [0.5])
    assert p.verdict is Ternary.TRUE and p.label == 1


def test_label_tie_goes_low():
    t = FittedTree(leaf(0.5, 0.5), 2, 1, BT)
    assert predict_probabilistic(t, [0.0]).label == 0


MODES_BT = [RoutingMode.PROBABILISTIC, RoutingMode.DEFERRED, RoutingMode.BINARY]
MODES_TRI = [RoutingMode.HARD_MIDDLE, RoutingMode.BINARY]


def _fitted(seed, kind, arch):
    X, y, k = random_small_dataset(seed)
    return X, fit(X, y, FitParams(delta_method=DeltaMethod(kind), architecture=arch, seed=seed), n_classes=k)


@settings(max_examples=30)
@given(seed=st.integers(0, 5000), kind=st.sampled_from(list(DeltaKind)))
def test_batch_matches_scalar(seed, kind):
    for arch, modes in ((Architecture.BINARY_TERNARY, MODES_BT), (Architecture.TRINARY, MODES_TRI)):
        X, tree = _fitted(seed, kind, arch)
        rng = np.random.default_rng(seed)
        Xq = np.vstack([X, X + rng.normal(0, 0.3, X.shape)])
        for mode in modes:
            batch = predict_batch(tree, Xq, mode)
            for i, x in enumerate(Xq):
                one = predict_one(tree, x, mode)
                np.testing.assert_allclose(batch.probs[i], one.probs.probs, rtol=0, atol=1e-12)
                assert batch.labels[i] == one.label and batch.verdicts[i] == one.verdict


@settings(max_examples=30)
@given(seed=st.integers(0, 5000), kind=st.sampled_from(list(DeltaKind)))
def test_verdict_equals_trace_fold(seed, kind):
    for arch, modes in ((Architecture.BINARY_TERNARY, MODES_BT), (Architecture.TRINARY, MODES_TRI)):
        X, tree = _fitted(seed, kind, arch)
        for mode in modes:
            for x in X[:40]:
                assert verdict_from_trace(zone_trace(tree, x, mode)) is predict_one(tree, x, mode).verdict


def test_probabilities_normalised():
    X, tree = _fitted(9, DeltaKind.CLASS_OVERLAP, Architecture.BINARY_TERNARY)
    b = predict_batch(tree, X)
    np.testing.assert_allclose(b.probs.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_array_equal(b.labels, np.argmax(b.probs, axis=1))


def test_batch_shape_errors():
    with pytest.raises(ValueError):
        predict_batch(stump(), np.zeros((3, 2)))
    assert len(predict_batch(stump(), np.zeros((0, 1)))) == 0
