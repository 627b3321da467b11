"""Lloyd scalar quantizer for CSI feedback compression.

The codebook is trained on an empirical sample set by alternating
nearest-level partition and cell-centroid updates until the relative
distortion change falls below ``REL_TOL``.  For channel matrices every
real component (real and imaginary part of each entry) is quantized
independently with the same codebook.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import SeededRng

REL_TOL = 1e-8
MAX_ITERATIONS = 500


@dataclass(frozen=True)
class QuantizerCodebook:
    """v-bit scalar codebook: 2**v ascending levels and the midpoint thresholds."""

    v: int
    levels: np.ndarray
    distortion_trace: tuple = field(default=(), compare=False, repr=False)
    boundaries: np.ndarray = field(init=False)

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.float64)
        if levels.size != 2**self.v:
            raise ValueError("level count must be 2**v")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("levels must be strictly ascending")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "boundaries", (levels[:-1] + levels[1:]) / 2.0)

    def quantize(self, x: np.ndarray) -> np.ndarray:
        """Indices of the nearest level for each scalar."""
        return np.searchsorted(self.boundaries, np.asarray(x, dtype=np.float64), side="left")

    def dequantize(self, indices: np.ndarray) -> np.ndarray:
        return self.levels[np.asarray(indices, dtype=np.int64)]


def _distortion(samples: np.ndarray, levels: np.ndarray) -> float:
    boundaries = (levels[:-1] + levels[1:]) / 2.0
    idx = np.searchsorted(boundaries, samples, side="left")
    return float(np.mean((samples - levels[idx]) ** 2))


def lloyd_train(samples: np.ndarray, v: int) -> QuantizerCodebook:
    """Train a v-bit Lloyd codebook on a sample set.

    Levels start at the (i + 1/2)/2**v sample quantiles.  An emptied cell
    is reseeded at the midpoint of the most populated cell, keeping the
    iteration deterministic.
    """
    if not 1 <= v <= 8:
        raise ValueError("v must be in [1, 8]")
    samples = np.asarray(samples, dtype=np.float64).ravel()
    n_levels = 2**v
    if samples.size < 100 * n_levels:
        raise ValueError(f"need at least {100 * n_levels} samples for v={v}")

    sorted_samples = np.sort(samples)
    q = (np.arange(n_levels) + 0.5) / n_levels
    levels = np.quantile(sorted_samples, q)
    levels = _make_strictly_ascending(levels)

    trace = [_distortion(samples, levels)]
    for _ in range(MAX_ITERATIONS):
        boundaries = (levels[:-1] + levels[1:]) / 2.0
        idx = np.searchsorted(boundaries, samples, side="left")
        counts = np.bincount(idx, minlength=n_levels)
        sums = np.bincount(idx, weights=samples, minlength=n_levels)
        new_levels = levels.copy()
        nonzero = counts > 0
        new_levels[nonzero] = sums[nonzero] / counts[nonzero]
        for cell in np.flatnonzero(~nonzero):
            big = int(np.argmax(counts))
            lo = boundaries[big - 1] if big > 0 else sorted_samples[0]
            hi = boundaries[big] if big < n_levels - 1 else sorted_samples[-1]
            new_levels[cell] = (lo + hi) / 2.0
        levels = _make_strictly_ascending(np.sort(new_levels))
        dist = _distortion(samples, levels)
        trace.append(dist)
        if trace[-2] > 0 and abs(trace[-2] - dist) / trace[-2] < REL_TOL:
            break
    return QuantizerCodebook(v=v, levels=levels, distortion_trace=tuple(trace))


def _make_strictly_ascending(levels: np.ndarray) -> np.ndarray:
    out = levels.copy()
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return out


def train_csi_codebook(v: int, rng: SeededRng, num_samples: int = 200_000,
                       train_sigma: float = 1.0 / np.sqrt(2.0)) -> QuantizerCodebook:
    """Codebook for CN(0,1) channel entries: per-component std is 1/sqrt2."""
    return lloyd_train(train_sigma * rng.normal(num_samples), v)


def quantize_csi(h: np.ndarray, cb: QuantizerCodebook) -> tuple[np.ndarray, np.ndarray]:
    """Quantize each real component of a channel matrix independently.

    Returns (indices, hq): indices has shape (m_r, m_t, 2) with v bits per
    entry, hq is the dequantized complex matrix the transmitter works from.
    """
    h = np.asarray(h, dtype=np.complex128)
    comps = np.stack([h.real, h.imag], axis=-1)
    indices = cb.quantize(comps)
    deq = cb.dequantize(indices)
    hq = deq[..., 0] + 1j * deq[..., 1]
    return indices, hq
