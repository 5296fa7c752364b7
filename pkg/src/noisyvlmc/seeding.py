"""Reproducible random streams.

Every stream is a numpy ``Generator`` over ``PCG64``.  Derived seeds are
obtained with ``SeedSequence(base, spawn_key=keys)``, which hashes the base
seed together with the integer keys; the first 64 bits of its state become
the derived integer seed.
"""

import numpy as np

GENERATOR_NAME = f"numpy-{np.__version__} PCG64 / SeedSequence spawn_key mixing"

# stream tags keep the hidden-chain and channel streams disjoint
STREAM_CHAIN = 0
STREAM_FLIP = 1


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def mix_seed(base: int, *keys: int) -> int:
    ss = np.random.SeedSequence(int(base), spawn_key=tuple(int(k) for k in keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)
