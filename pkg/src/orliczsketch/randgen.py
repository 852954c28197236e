"""Seeded samplers.

Every random draw in the package comes from a :class:`SeedSpec`. A spec
names a root seed and a substream; ``spec.generator(*keys)`` derives further
independent children, so a trial, a restart or a sketch stage each get
their own stream no matter what order (or thread) they run in.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SeedSpec:
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream must be nonnegative")

    def generator(self, *keys):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *keys))
        return np.random.Generator(np.random.PCG64(ss))

    def as_dict(self):
        return {"seed": self.seed, "stream": self.stream}


def as_generator(rng):
    """Accept a Generator, a SeedSpec, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeedSpec):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return SeedSpec(0 if rng is None else int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def as_seedspec(seed):
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        return SeedSpec()
    return SeedSpec(int(seed))


def sample_generalized_exponential(g, rng, count):
    """``count`` draws with CDF 1 - exp(-G(t)), as G^{-1}(E) for E ~ Exp(1)."""
    rng = as_generator(rng)
    e = rng.standard_exponential(count)
    return g.inverse(e)


def sample_p_stable(p, rng, count):
    """Symmetric p-stable draws by Chambers-Mallows-Stuck.

    Scale convention is the CMS one: p = 1 gives the standard Cauchy and
    p = 2 gives N(0, 2).
    """
    p = float(p)
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    rng = as_generator(rng)
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, count)
    if p == 1.0:
        return np.tan(v)
    w = rng.standard_exponential(count)
    return (np.sin(p * v) / np.cos(v) ** (1.0 / p)
            * (np.cos(v - p * v) / w) ** ((1.0 - p) / p))


def sample_gaussian(rng, shape):
    return as_generator(rng).standard_normal(shape)
