"""Counter-based random primitives for reproducible simulation.

Every draw is a pure function of a seed and a tuple of stream indices
(SplitMix64-style integer mixing), so simulations can be chunked or
parallelized arbitrarily without changing a single number.
"""

from __future__ import annotations

import numpy as np

_MULT1 = np.uint64(0xBF58476D1CE4E5B9)
_MULT2 = np.uint64(0x94D049BB133111EB)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_WORD = 1 << 64


def _finalize(x: np.ndarray) -> np.ndarray:
    # SplitMix64 finalizer; uint64 array arithmetic wraps modulo 2**64.
    x = (x ^ (x >> np.uint64(30))) * _MULT1
    x = (x ^ (x >> np.uint64(27))) * _MULT2
    return x ^ (x >> np.uint64(31))


def counter_hash(seed: int, *streams) -> np.ndarray:
    """Hash (seed, streams...) to uint64 values.

    Streams are nonnegative integers or integer arrays and broadcast
    against each other like ordinary numpy operands, so callers can
    request whole blocks of draws in one call.
    """
    h = _finalize(np.asarray([seed % _WORD], dtype=np.uint64))
    for stream in streams:
        arr = np.asarray(stream, dtype=np.uint64)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        h = _finalize((h + _GAMMA) ^ arr)
    return h


def uniform01(seed: int, *streams) -> np.ndarray:
    """Uniform [0, 1) doubles with 53-bit resolution, one per stream point."""
    bits = counter_hash(seed, *streams) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0**-53
