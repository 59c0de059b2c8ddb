import numpy as np


def seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, None or an existing SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
