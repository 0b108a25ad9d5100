"""
How much flagging does the problem call for?
============================================

On generators with a known Bayes error the boundary-uncertain rate can be
set against it (U/B). A ratio near one flags about as much as the
problem is irreducibly ambiguous; far above one is over-flagging.
This is a reduced version of the configs/breiman.yaml run.
"""

import ternary_cart as tc
from ternary_cart.bench import BenchConfig, DatasetSpec, MethodSpec, report_text, run_benchmark
from ternary_cart.data import estimate_bayes_error_mc

for name in ("twonorm", "ringnorm"):
    print(name, "Monte Carlo Bayes error:", estimate_bayes_error_mc(name, 200_000))

config = BenchConfig(
    datasets=[DatasetSpec("twonorm", "twonorm", 2000), DatasetSpec("ringnorm", "ringnorm", 2000)],
    methods=[MethodSpec(tc.DeltaMethod(k)) for k in
             (tc.DeltaKind.MARGIN, tc.DeltaKind.NODE_BOOTSTRAP, tc.DeltaKind.QUALITY_PLATEAU)],
)
print(report_text(run_benchmark(config)))
