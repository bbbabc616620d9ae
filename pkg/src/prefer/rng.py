"""Counter-based deterministic random streams.

Every draw is a pure function of (seed, stream tag, counter words), built on
SplitMix64 mixing.  This makes any single variate reproducible in isolation
(no hidden generator state) and lets batches of draws be computed with
vectorized numpy arithmetic.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)

# Stream tags keep draws for different purposes statistically independent
# even when their counter words coincide.
GUMBEL_STREAM = 0x47554D42
NOISE_STREAM = 0x4E4F4953


def _mix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        x = x + _GOLDEN
        x = (x ^ (x >> np.uint64(30))) * _MIX_A
        x = (x ^ (x >> np.uint64(27))) * _MIX_B
        return x ^ (x >> np.uint64(31))


def _hash_words(seed: int, words: tuple) -> np.ndarray:
    h = _mix64(np.asarray(np.uint64(seed)))
    for w in words:
        h = _mix64(h ^ np.asarray(w, dtype=np.uint64))
    return h


def uniform(seed: int, *words) -> np.ndarray | float:
    """Uniform variate(s) in the open interval (0, 1).

    ``words`` are nonnegative integer counters; any of them may be a numpy
    integer array, in which case the result broadcasts accordingly.
    """
    h = _hash_words(seed, words)
    u = ((h >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52
    if u.ndim == 0:
        return float(u)
    return u


def gumbel(seed: int, *words) -> np.ndarray | float:
    """Standard Gumbel variate(s) via inverse CDF: g = -log(-log(U))."""
    u = uniform(seed, *words)
    return -np.log(-np.log(u))


def normal(seed: int, *words) -> np.ndarray | float:
    """Standard normal variate(s) via Box-Muller on two counter draws."""
    u1 = uniform(seed, *words, 0)
    u2 = uniform(seed, *words, 1)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    if np.ndim(z) == 0:
        return float(z)
    return z
