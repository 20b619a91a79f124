from __future__ import annotations

import numpy as np



def as_generator(seed) -> np.random.Generator:
    """Normalize an int, SeedSequence or Generator into a PCG64 Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def child_seed(master: int, index: int) -> int:
    """Counter-based split: a 63-bit seed for work item `index`.

    Depends only on (master, index), so scheduling order cannot change it.
    """
    ss = np.random.SeedSequence(entropy=master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def split(seed, n: int) -> list[np.random.Generator]:
    """Independent generators for `n` sub-tasks of one seeded operation."""
    if isinstance(seed, np.random.Generator):
        ss = seed.bit_generator.seed_seq
    elif isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(n)]
