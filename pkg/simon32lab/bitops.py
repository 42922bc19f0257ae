# -*- coding: utf-8 -*-
"""Word-level bit helpers shared by the cipher and the differential kernels.

Every helper accepts either a Python int or a numpy unsigned-integer array,
so the same code path serves scalar reference checks and vectorized batches.
"""

from __future__ import annotations

# Import typing primitives.
from typing import Any

# Import numpy for the vectorized popcount table.
import numpy as np

# Import local error types.
from .errors import ContractError

# Popcount lookup table for 16-bit chunks.
_POPCOUNT16 = np.zeros(1 << 16, dtype=np.uint8)
for _bit in range(16):
    _POPCOUNT16 += ((np.arange(1 << 16, dtype=np.uint32) >> _bit) & 1).astype(np.uint8)
del _bit


def word_mask(n: int) -> int:
    """Return 2^n - 1."""
    return (1 << n) - 1


def word_dtype(n: int) -> Any:
    """Return the numpy dtype that holds n-bit words with room for one extra shift."""
    return np.uint32 if n <= 16 else np.uint64


def rotl(x: Any, r: int, n: int = 16) -> Any:
    """Left circular rotation of an n-bit word by r positions (0 <= r < n)."""
    if not 0 <= r < n:
        raise ContractError(f"rotation amount {r} outside [0, {n})")
    mask = word_mask(n)
    return ((x << r) & mask) | ((x & mask) >> (n - r))


def rotr(x: Any, r: int, n: int = 16) -> Any:
    """Right circular rotation, provided as rotl(x, n - r)."""
    if not 0 <= r < n:
        raise ContractError(f"rotation amount {r} outside [0, {n})")
    return rotl(x, (n - r) % n, n)


def hw(x: int) -> int:
    """Hamming weight of a non-negative Python int."""
    return int(x).bit_count()


def hw_array(x: np.ndarray) -> np.ndarray:
    """Vectorized Hamming weight of an unsigned-integer array (int32 result)."""
    arr = np.asarray(x)
    out = _POPCOUNT16[arr & 0xFFFF].astype(np.int32)
    # Wider dtypes need the upper 16-bit chunks as well.
    shift = 16
    while shift < arr.dtype.itemsize * 8:
        out += _POPCOUNT16[(arr >> shift) & 0xFFFF]
        shift += 16
    return out
