from typing import Any, cast

import numpy as np
import numpy.random as npr

type SeedLike = int | npr.Generator | None
"""
Seed accepted by simulators: an integer seed, an existing generator, or None for the global ``rng``.
"""


def make_rng(seed: int | None, stream: int = 0) -> npr.Generator:
    """
    Construct an independent PCG64 generator for one member of an ensemble.

    Args:
        seed: master seed; None draws fresh OS entropy.
        stream: run index; distinct streams of the same master seed never overlap.
    """
    ss = npr.SeedSequence(seed, spawn_key=(stream,))
    return npr.Generator(npr.PCG64(ss))


_global = make_rng(None)
"""
Generator behind ``rng``, replaced by ``reseed``.
"""


class RngUtils:
    def reseed(self, seed: int | None):
        """
        Restart the global generator as stream 0 of ``seed``, the stream ``make_rng(seed)`` returns.
        """
        global _global
        _global = make_rng(seed)


class RngProxy(RngUtils):
    """
    Forwards generator methods to the current global generator.
    """

    def __getattr__(self, name: str) -> Any:
        return getattr(_global, name)


class RngPublic(npr.Generator, RngUtils):
    """
    Global random number generator, public API declaration.
    """


rng = cast(RngPublic, RngProxy())
"""
Global random number generator, used by simulators called without a seed.
"""


def as_generator(seed: SeedLike) -> npr.Generator:
    """Resolve ``SeedLike`` into a generator."""
    if isinstance(seed, npr.Generator):
        return seed
    if seed is None:
        return cast(npr.Generator, rng)
    return make_rng(int(np.uint64(seed)))
