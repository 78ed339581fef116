"""Seeding helpers.

Every random draw in the package goes through a ``numpy.random.Generator``
backed by PCG64 and constructed from an explicit 64-bit seed. There is no
global generator.
"""

import numpy as np

from .errors import UsageError

MAX_SEED = 2**64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def derive_seed(seed, *path: int) -> int:
    """Child seed for ``(seed, *path)``, e.g. one per query index.

    Independent of evaluation order, so batch work can be split across
    threads without changing results.
    """
    ss = np.random.SeedSequence([check_seed(seed), *(int(p) for p in path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
