"""Named random streams derived from a single root seed.

Every subsystem draws from its own generator so that, for instance, changing
the number of negatives does not perturb the initialization.
"""

import numpy as np

STREAMS = {
    "split": 1,
    "init": 2,
    "shuffle": 3,
    "negative": 4,
    "generate": 5,
    "eval": 6,
}


def stream(seed, name):
    """Return a fresh ``numpy.random.Generator`` for stream ``name``."""
    try:
        key = STREAMS[name]
    except KeyError:
        raise ValueError(f"unknown random stream {name!r}") from None
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, key])
