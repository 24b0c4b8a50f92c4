"""Sweep the pelt penalty and watch the number of detected changes fall.

Small penalties buy many segments, large ones buy few; the plateau around
the true count is usually wide when the shifts are clear.
"""

import numpy as np

import segscan as ss

signal, truth = ss.pw_constant(
    ss.GenSpec(n_samples=600, n_dims=1, n_bkps=5, noise_std=1.5, seed=3)
)
fitted = ss.fit(ss.CostSpec(family="l2"), signal)

print("true change count:", truth.n_bkps)
print()
print("penalty   changes   contrast")
for penalty in (0.5, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 300.0):
    result = ss.pelt(fitted, penalty)
    print("%7.1f   %7d   %8.1f" % (penalty, result.bkps.n_bkps, result.contrast))

# the same trade-off, driven from the other side: ask for the cheapest
# segmentation whose total cost fits a budget
budget = ss.solve_budget(fitted, 1.1 * ss.dynp(fitted, 5).contrast)
print()
print("cheapest segmentation within 110%% of the 5-change optimum: %d changes"
      % budget.bkps.n_bkps)
