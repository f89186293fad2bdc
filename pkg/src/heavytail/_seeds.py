import numpy as np


def flatten(seed) -> list:
    """Nested tuples of non-negative ints -> flat entropy list."""
    if isinstance(seed, (list, tuple)):
        out = []
        for s in seed:
            out.extend(flatten(s))
        return out
    if seed is None:
        raise ValueError("a seed is required for Monte Carlo paths")
    return [int(seed)]


def seed_sequence(seed, *spawn_key) -> np.random.SeedSequence:
    return np.random.SeedSequence(flatten(seed), spawn_key=tuple(spawn_key))
