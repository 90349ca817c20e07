"""Seedable, splittable random streams.

Every random draw is taken from a stream keyed by (seed, purpose, *subkeys),
so results do not depend on the order in which trials execute.
"""
from enum import IntEnum

import numpy as np

from riemprod.exceptions import InvalidInputError


class Stream(IntEnum):
    """Purposes that own an independent substream of a seed."""
    TRIAL = 0
    STRUCTURE = 1
    THETA = 2
    NABLA_THETA = 3
    CURVATURE = 4
    PARAMS = 5
    PLANES = 6
    FTENSOR = 7
    CONTROL = 8
    AUXILIARY = 9


def _sequence(seed: int, purpose: Stream, *subkeys: int) -> np.random.SeedSequence:
    if seed < 0:
        raise InvalidInputError(f"Seeds must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(purpose),) + tuple(int(k) for k in subkeys))


def stream(seed: int, purpose: Stream, *subkeys: int) -> np.random.Generator:
    """PCG64 generator for the given seed and purpose."""
    return np.random.Generator(np.random.PCG64(_sequence(seed, purpose, *subkeys)))


def derived_seed(seed: int, purpose: Stream, index: int) -> int:
    """A 32-bit seed derived from (seed, purpose, index)."""
    return int(_sequence(seed, purpose, index).generate_state(1, dtype=np.uint32)[0])


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of trial `index` under a master seed."""
    return derived_seed(master_seed, Stream.TRIAL, index)
