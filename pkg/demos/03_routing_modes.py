"""
Probabilistic, deferred and hard-middle routing
===============================================

The same data through both architectures. Probabilistic and deferred
routing share one tree and differ only when a point sits in two nested
zones, so the flagged set is identical and only some blends change.
"""

import numpy as np

import ternary_cart as tc
from ternary_cart.bench import tree_to_dot
from ternary_cart.data import gen_twonorm

ds = gen_twonorm(2000, seed=1)
X, y = ds.features, ds.labels
Xte = gen_twonorm(2000, seed=2).features
yte = gen_twonorm(2000, seed=2).labels

kind = tc.DeltaMethod(tc.DeltaKind.CLASS_OVERLAP)
bt = tc.fit(X, y, tc.FitParams(delta_method=kind))
tri = tc.fit(X, y, tc.FitParams(delta_method=kind, architecture=tc.Architecture.TRINARY))

prob = tc.predict_batch(bt, Xte, tc.RoutingMode.PROBABILISTIC)
deferred = tc.predict_batch(bt, Xte, tc.RoutingMode.DEFERRED)
hard = tc.predict_batch(tri, Xte)

print("same flags:", np.array_equal(prob.verdicts, deferred.verdicts))
print("rows whose blend differs:", int(np.sum(np.any(prob.probs != deferred.probs, axis=1))))
print("labels that change:", int(np.sum(prob.labels != deferred.labels)))

for name, b in (("probabilistic", prob), ("deferred", deferred), ("hard_middle", hard)):
    m = tc.compute_metrics(b, yte)
    print(f"{name:<14} dec_acc={m.dec_acc:.4f} u={m.undec_rate:.3f} acc_all={m.acc_all:.4f}")

# a trinary tree drawn as Graphviz source; middle branches are dashed
small = tc.fit(X, y, tc.FitParams(max_depth=2, delta_method=kind, architecture=tc.Architecture.TRINARY))
print(tree_to_dot(small))
