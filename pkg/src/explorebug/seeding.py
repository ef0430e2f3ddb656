"""Named random streams derived from a single run seed.

Each consumer asks for its own stream by name, so adding a new consumer never
shifts the numbers another one draws.
"""
import zlib

import numpy as np


def stream(seed: int, name: str, *sub: int) -> np.random.Generator:
    key = (zlib.crc32(name.encode("utf-8")),) + tuple(int(s) for s in sub)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))
