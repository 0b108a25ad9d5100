"""
An uncertainty zone on a single split
=====================================

A one-feature stump, and what happens to points near its threshold.
"""

import numpy as np

import ternary_cart as tc
from ternary_cart.predict import zone_trace

# four training points, two per class, separated by a gap at 3.5
X = np.array([[1.0], [2.0], [5.0], [6.0]])
y = np.array([0, 0, 1, 1])

tree = tc.fit(X, y, tc.FitParams(max_depth=1))
root = tree.root
print(f"threshold {root.theta}, half-width {root.delta}")
# margin gives half the gap (1.5), capped at a quarter of the node range (1.25)

# walk across the zone: outside it a point is decided, inside it gets a blend
for x in np.linspace(1.5, 5.5, 9):
    p = tc.predict_batch(tree, [[x]])[0]
    print(f"x={x:4.1f}  verdict={p.verdict.name:5s}  probs={np.round(p.probs.probs, 3)}")

# the verdict is the Kleene AND of the zone values along the path
print(zone_trace(tree, [3.0]))
