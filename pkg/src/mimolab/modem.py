"""Gray-mapped QPSK modem and bit/index helpers.

Constellation (unit energy): 00 -> (+1+j)/sqrt2, 01 -> (-1+j)/sqrt2,
11 -> (-1-j)/sqrt2, 10 -> (+1-j)/sqrt2.  The first bit of a pair selects
the imaginary sign, the second the real sign; adjacent points differ in
exactly one bit.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)

# constellation indexed by the 2-bit label (b0 b1)
QPSK_POINTS = np.array(
    [
        (1 + 1j) / _SQRT2,  # 00
        (-1 + 1j) / _SQRT2,  # 01
        (1 - 1j) / _SQRT2,  # 10
        (-1 - 1j) / _SQRT2,  # 11
    ],
    dtype=np.complex128,
)


def qpsk_modulate(bits: np.ndarray) -> np.ndarray:
    """Map a flat bit array (even length) to unit-energy QPSK symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % 2 != 0:
        raise ValueError("bit count must be even")
    b0 = bits[0::2]
    b1 = bits[1::2]
    return ((1 - 2 * b1) + 1j * (1 - 2 * b0)) / _SQRT2


def qpsk_demodulate(symbols: np.ndarray) -> np.ndarray:
    """Nearest-point decisions; ties at an axis resolve to the 0 bit."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    b0 = (symbols.imag < 0).astype(np.int64)
    b1 = (symbols.real < 0).astype(np.int64)
    out = np.empty(symbols.size * 2, dtype=np.int64)
    out[0::2] = b0.ravel()
    out[1::2] = b1.ravel()
    return out


def index_to_bits(indices: np.ndarray, k: int) -> np.ndarray:
    """Natural-binary k-bit expansion, MSB first; shape (len(indices)*k,)."""
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1)
    return ((indices[:, None] >> shifts) & 1).reshape(-1)


def bits_to_index(bits: np.ndarray, k: int) -> np.ndarray:
    """Inverse of :func:`index_to_bits`."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    return bits @ weights
