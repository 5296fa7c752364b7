"""
Estimating the tree from a noisy sample
=======================================

Simulate the hidden chain, flip it, and run the threshold estimator.  The
threshold delta must sit inside a window: above the largest spurious gap on
extensions of true contexts, below the smallest real gap on the contexts.
"""

import os

from noisyvlmc import (
    ChainLaw,
    PerturbedLaw,
    compare_truncated,
    estimate_tree,
    exact_delta_window,
    load_tree,
    perturb,
    theoretical_delta_window,
)

HERE = os.path.dirname(os.path.abspath(__file__))
law = ChainLaw(load_tree(os.path.join(HERE, "..", "data", "t1.tree")))
d, K = 4, 2

for eps in (0.0, 0.01, 0.05):
    exact = exact_delta_window(PerturbedLaw(law, eps), d)
    theo = theoretical_delta_window(law, eps, d)
    print(f"eps={eps}: exact window ({exact.low:.4f}, {exact.high:.4f}), "
          f"theoretical ({theo.low:.4f}, {theo.high:.4f})")

# noiseless and noisy runs on the same hidden path
x = law.sample(100_000, seed=2007)
for eps in (0.0, 0.01, 0.05):
    z = perturb(x, eps, seed=11)
    delta = exact_delta_window(PerturbedLaw(law, eps), d).midpoint
    est = estimate_tree(z, delta, d)
    cmp = compare_truncated(est, law.tree, K)
    print(f"\neps={eps} delta={delta:.4f} max gap seen={est.max_delta:.4f}")
    print(est.to_tree().serialize(), end="")
    print(f"recovered at K={K}: {cmp.equal}  missing={sorted(cmp.missing)} extra={sorted(cmp.extra)}")
