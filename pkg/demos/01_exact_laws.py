"""
Exact laws of a noisy context-tree chain
========================================

The hidden chain X follows a small context tree.  We observe Z = X xor flips,
where each symbol flips independently with probability eps.  Z is a hidden
Markov model, so its cylinder probabilities can be computed exactly by a
forward recursion.  This script prints how memory fades as eps grows.
"""

import os

import numpy as np

from noisyvlmc import ChainLaw, PerturbedLaw, compute_constants, load_tree, theorem1_certify

HERE = os.path.dirname(os.path.abspath(__file__))
tree = load_tree(os.path.join(HERE, "..", "data", "t1.tree"))
law = ChainLaw(tree)

# the tree: next symbol given the most recent past (rightmost = newest)
print(tree.serialize())
print("stationary law of the last two symbols:")
for s in ("00", "01", "10", "11"):
    print(f"  {s}  {law.stationary_prob(s):.6f}")

# constants entering the perturbation bound
c = compute_constants(tree)
print(f"\nalpha={c.alpha}  beta={c.beta_sum}  beta*={c.beta_star}  C={c.c_const:g}")

# the observed conditional after "00" drifts from 0.8 toward 1/2
print("\neps      q(1|00)   q(1|10)   q(1|1)")
for eps in (0.0, 0.01, 0.05, 0.1, 0.25, 0.5):
    z = PerturbedLaw(law, eps)
    print(f"{eps:<8} " + "  ".join(f"{z.conditional(1, w):.5f}" for w in ("00", "10", "1")))

# exact sup-gap between noisy and clean conditionals vs the C*eps bound
print("\neps      max gap    C*eps")
for eps in (0.001, 0.01, 0.1):
    r = theorem1_certify(PerturbedLaw(law, eps), 10)
    print(f"{eps:<8} {r.max_gap:.6f}   {r.bound:.3f}")

# at eps = 1/2 every string of length L has probability 2^-L
levels = PerturbedLaw(law, 0.5).levels(8)
print("\nmax |q(w) - 2^-L| at eps=1/2:", max(np.abs(lv.prob - 2.0 ** -L).max() for L, lv in enumerate(levels)))
