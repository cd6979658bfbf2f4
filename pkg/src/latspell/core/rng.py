"""Named deterministic random streams.

Every piece of randomness (init of one parameter, dropout, shuffling, the
synthetic generator) draws from its own stream keyed by (seed, purpose), so
adding or removing one consumer never shifts the draws of another. That
property is what makes shared parameters bit-identical across model variants.
"""

import zlib

import numpy as np


def stream(seed: int, *purpose) -> np.random.Generator:
    """PCG64 generator for the given seed and purpose path.

    Purpose components may be strings or ints; strings are hashed with crc32
    (stable across platforms and processes, unlike hash()).
    """
    keys = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for p in purpose:
        if isinstance(p, int):
            keys.append(p & 0xFFFFFFFFFFFFFFFF)
        else:
            keys.append(zlib.crc32(str(p).encode("utf-8")))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(keys)))
