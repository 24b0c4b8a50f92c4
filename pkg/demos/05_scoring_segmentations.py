"""
Scoring a segmentation against ground truth
===========================================

Three complementary views of the same prediction: worst-case end
displacement (hausdorff), sample-pair agreement (rand_index), and matched
ends within a tolerance (precision_recall).
"""

import segscan as ss

T = 100
truth = ss.validate_breakpoints([30, 60, 100], T)

candidates = {
    "exact":       [30, 60, 100],
    "jittered":    [28, 63, 100],
    "missed one":  [30, 100],
    "extra one":   [30, 45, 60, 100],
    "way off":     [80, 100],
}

print("prediction    hausdorff   rand    margin-3 precision/recall")
for name, ends in candidates.items():
    pred = ss.validate_breakpoints(ends, T)
    scores = ss.precision_recall(truth, pred, margin=3)
    print("%-12s  %9d   %.3f   %.2f / %.2f"
          % (name, ss.hausdorff(truth, pred), ss.rand_index(truth, pred),
             scores.precision, scores.recall))

# the margin decides what counts as a hit: the jittered prediction is
# perfect at margin 3, useless at margin 1
jittered = ss.validate_breakpoints([28, 63, 100], T)
for margin in (0, 1, 3, 5):
    scores = ss.precision_recall(truth, jittered, margin=margin)
    print("margin %d -> precision %.2f recall %.2f"
          % (margin, scores.precision, scores.recall))
