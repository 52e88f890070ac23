"""Reproducible random streams for replica farms.

Every Monte Carlo replica gets its own 64-bit key derived by hashing
(seed, stream, replica index) with the splitmix64 finalizer.  Keys are a
pure function of those three integers: no sequential splitting, no state
shared between replicas, and the mapping replica -> key is injective for
a fixed (seed, stream) pair.  This is what makes results independent of
the number of worker threads: each replica's random sequence depends only
on its key, and reductions happen in replica order.

Keys feed two kinds of generators:

* ``generator(key)`` gives a ``numpy.random.Generator`` (PCG64) for
  Python-level sampling;
* numba kernels seed an inline xoshiro256++ from the key via four
  splitmix64 outputs (``xo_seed`` / ``xo_next`` below).
"""

import numpy as np
from numba import njit

__all__ = [
    "derive_keys",
    "replica_keys",
    "generator",
    "DERIVATION_SCHEME",
]

# splitmix64 constants (Steele, Lea & Flood; public domain reference code)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

DERIVATION_SCHEME = (
    "key(seed, stream, i) = mix64(mix64(mix64(seed + G) ^ (stream*G + G)) ^ (i*G + G)) "
    "with G = 0x9E3779B97F4A7C15 and mix64 the splitmix64 finalizer "
    "(x ^= x>>30; x *= 0xBF58476D1CE4E5B9; x ^= x>>27; x *= 0x94D049BB133111EB; x ^= x>>31); "
    "all arithmetic mod 2^64"
)


def _mix64(x):
    """splitmix64 finalizer, vectorized over uint64 arrays (mod 2**64)."""
    # uint64 arithmetic wraps by design; silence numpy's overflow warning
    with np.errstate(over="ignore"):
        x = np.asarray(x, dtype=np.uint64)
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        return x ^ (x >> np.uint64(31))


def derive_keys(seed, stream, n, start=0):
    """Keys for replicas ``start .. start+n-1`` of the given (seed, stream).

    ``seed`` is the experiment root seed, ``stream`` distinguishes
    independent uses inside one experiment (e.g. simulation draws vs mark
    draws).  Injective in the replica index for fixed (seed, stream).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    with np.errstate(over="ignore"):
        idx = np.arange(start, start + n, dtype=np.uint64)
        h = _mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF) + _GAMMA)
        h = _mix64(h ^ (np.uint64(int(stream) & 0xFFFFFFFFFFFFFFFF) * _GAMMA + _GAMMA))
        return _mix64(h ^ (idx * _GAMMA + _GAMMA))


def replica_keys(rng, n, stream=0, start=0):
    """Per-replica keys from an integer seed, a Generator, or a key array.

    Integer seeds use the documented hash derivation (the reproducible
    path used by the experiment runner).  A ``numpy.random.Generator``
    is also accepted for ad-hoc use (keys are then drawn from it), as is
    a pre-derived uint64 key array, which is passed through.
    """
    if isinstance(rng, (int, np.integer)):
        return derive_keys(int(rng), stream, n, start=start)
    if isinstance(rng, np.random.Generator):
        if start:
            rng.integers(0, 2**64, size=start, dtype=np.uint64)
        return rng.integers(0, 2**64, size=n, dtype=np.uint64)
    if isinstance(rng, np.ndarray) and rng.dtype == np.uint64:
        if rng.size < start + n:
            raise ValueError(f"key array holds {rng.size} keys, need {start + n}")
        return rng[start : start + n]
    raise TypeError(
        f"rng must be an int seed, numpy Generator or uint64 key array, got {type(rng)!r}"
    )


def generator(key):
    """numpy Generator (PCG64) keyed by a single 64-bit key."""
    return np.random.Generator(np.random.PCG64(int(key)))


def as_generator(rng):
    """Normalize an int seed or Generator to a Generator."""
    if isinstance(rng, (int, np.integer)):
        return generator(np.uint64(int(rng) & 0xFFFFFFFFFFFFFFFF))
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"rng must be an int seed or numpy Generator, got {type(rng)!r}")


# ---------------------------------------------------------------------------
# numba-side generator: xoshiro256++ seeded from a key through splitmix64.
# These are meant to be called from inside @njit kernels only.
# ---------------------------------------------------------------------------

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U45 = np.uint64(45)
_U64 = np.uint64(64)
_TO_UNIT = 1.1102230246251565e-16  # 2**-53


@njit(cache=True, inline="always")
def _sm64(state):
    state = np.uint64(state + _GAMMA)
    z = state
    z = np.uint64((z ^ (z >> _U30)) * _MIX1)
    z = np.uint64((z ^ (z >> _U27)) * _MIX2)
    return state, np.uint64(z ^ (z >> _U31))


@njit(cache=True, inline="always")
def xo_seed(key):
    """Expand a 64-bit key into an xoshiro256++ state (4 words)."""
    st = np.uint64(key)
    st, s0 = _sm64(st)
    st, s1 = _sm64(st)
    st, s2 = _sm64(st)
    st, s3 = _sm64(st)
    return s0, s1, s2, s3


@njit(cache=True, inline="always")
def xo_next(s0, s1, s2, s3):
    """One xoshiro256++ step; returns updated state and a uint64 draw."""
    res = np.uint64(np.uint64((np.uint64(s0 + s3) << _U23) | (np.uint64(s0 + s3) >> np.uint64(64 - 23))) + s0)
    t = np.uint64(s1 << _U17)
    s2 = np.uint64(s2 ^ s0)
    s3 = np.uint64(s3 ^ s1)
    s1 = np.uint64(s1 ^ s2)
    s0 = np.uint64(s0 ^ s3)
    s2 = np.uint64(s2 ^ t)
    s3 = np.uint64((s3 << _U45) | (s3 >> np.uint64(64 - 45)))
    return s0, s1, s2, s3, res


@njit(cache=True, inline="always")
def unit_f64(z):
    """Map a uint64 draw to a double in [0, 1) using the top 53 bits."""
    return (z >> _U11) * _TO_UNIT


@njit(cache=True, inline="always")
def exp_f64(z):
    """Standard exponential from a uint64 draw (strictly positive)."""
    return -np.log(1.0 - unit_f64(z))
