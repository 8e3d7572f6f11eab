"""
How many instances does it take to tell two features apart?
============================================================

Even the smallest possible selection problem - picking the better of two
features by their estimated error rates - needs a surprisingly large
sample.  This script reproduces the worked numbers and sweeps the curve.
"""

import numpy as np

from widefs.samplesize import (
    McNemarPlan,
    SmoothedPlan,
    mcnemar_sample_size,
    sample_size_curve,
    smoothed_sample_size,
)
from widefs.report import emit_samplesize_curve_svg

# Two features whose single-feature classifiers are correct with
# probability 0.85 and 0.80.  Under independence the agreement
# probability (both correct at once) is just the product.
plan = McNemarPlan.independent(p1=0.85, p2=0.80, alpha=0.05)
print(f"independent features:        N = {mcnemar_sample_size(plan):7.1f}")

# Agreement helps: if the two features are correct on almost the same
# instances, far fewer observations separate them.
plan = McNemarPlan(p1=0.85, p2=0.80, d_agree=0.80, alpha=0.05)
print(f"maximally agreeing features: N = {mcnemar_sample_size(plan):7.1f}")

# The continuous-score variant (classifiers that output probabilities
# rather than 0/1 correctness) is a lower bound on the rank-test cost.
plan = SmoothedPlan(p1=0.85, p2=0.80, var1=0.04, var2=0.04, cov=0.0)
print(f"smoothed scores, one-tailed: N = {smoothed_sample_size(plan):7.1f}")

# Sweep p1 with a fixed 0.05 gap at two significance levels and plot.
rows = sample_size_curve(np.arange(0.55, 0.9501, 0.01), gap=0.05, alphas=[0.05, 0.01])
out = emit_samplesize_curve_svg(rows, "samplesize_curve.svg")
print(f"\nwrote {out} ({len(rows)} curve points)")
print("note how even at p1 = 0.95 the requirement stays in the hundreds")
