"""Seed-derivation helpers.

Every source of randomness in the package flows through numpy Generators
built from explicit integer keys, so that repetitions, restarts, and
pipeline stages can run in any order (or in parallel) without changing
results.
"""

import numpy as np


def derive_rng(*keys: int) -> np.random.Generator:
    """Generator for the stream identified by the given key tuple."""
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in keys)))


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into a single reproducible 63-bit seed."""
    state = np.random.SeedSequence(tuple(int(k) for k in keys)).generate_state(2)
    return (int(state[0]) | (int(state[1]) << 32)) & (2**63 - 1)
