"""Stochastic channel model: Rayleigh draws, AWGN, power normalization, SNR bookkeeping.

All randomness flows through :class:`SeededRng`, a counter-based Philox
stream keyed by ``(seed, stream)``.  Gaussian variates are produced by an
explicit Box-Muller transform on the raw uniforms, so a given key yields
the same draw sequence on every run.  Parallel workers must use distinct
stream ids; there is no hidden global generator.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class SeededRng:
    """Reproducible random stream keyed by (seed, stream)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream: int) -> "SeededRng":
        """Independent stream under the same seed (for per-worker/per-point use)."""
        return SeededRng(self.seed, stream)

    def uniform(self, size=None) -> np.ndarray:
        """Uniforms in [0, 1)."""
        return self._gen.random(size)

    def integers(self, n: int, size=None) -> np.ndarray:
        """Uniform integers in [0, n)."""
        return np.minimum((self.uniform(size) * n).astype(np.int64), n - 1)

    def normal(self, size=None) -> np.ndarray:
        """Standard real normals via Box-Muller."""
        shape = () if size is None else size
        count = int(np.prod(shape)) if shape != () else 1
        pairs = (count + 1) // 2
        u1 = 1.0 - self.uniform(pairs)  # (0, 1], keeps log finite
        u2 = self.uniform(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
        z = z[:count].reshape(shape)
        return float(z) if size is None else z

    def cnormal(self, size=None) -> np.ndarray:
        """Circularly symmetric complex normals CN(0, 1), unit total variance."""
        shape = () if size is None else size
        count = int(np.prod(shape)) if shape != () else 1
        u1 = 1.0 - self.uniform(count)
        u2 = self.uniform(count)
        z = np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)
        z = z.reshape(shape)
        return complex(z) if size is None else z


def draw_rayleigh(m_r: int, m_t: int, rng: SeededRng) -> np.ndarray:
    """One flat Rayleigh channel realization: (m_r, m_t) i.i.d. CN(0, 1) entries."""
    if m_r < 1 or m_t < 1:
        raise ValueError("antenna counts must be >= 1")
    return rng.cnormal((m_r, m_t))


def draw_rayleigh_batch(batch: int, m_r: int, m_t: int, rng: SeededRng) -> np.ndarray:
    """Stack of `batch` independent realizations, shape (batch, m_r, m_t)."""
    if m_r < 1 or m_t < 1:
        raise ValueError("antenna counts must be >= 1")
    return rng.cnormal((batch, m_r, m_t))


def awgn(x: np.ndarray, sigma, rng: SeededRng) -> np.ndarray:
    """Add complex white Gaussian noise of per-sample variance sigma**2.

    `sigma` may be a scalar or an array broadcastable against `x` (used for
    per-example noise levels in a batch).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    x = np.asarray(x)
    return x + sigma * rng.cnormal(x.shape)


def normalize_power(x: np.ndarray) -> np.ndarray:
    """Scale a batch by one positive scalar so the mean |entry|^2 equals 1."""
    x = np.asarray(x)
    if x.size == 0:
        raise ValueError("empty batch")
    power = float(np.mean(np.abs(x) ** 2))
    if power == 0.0:
        raise ValueError("all-zero batch cannot be power-normalized")
    return x / np.sqrt(power)


def snr_to_sigma(snr_db: float) -> float:
    """Per-sample complex noise deviation for a given SNR against unit signal power."""
    snr_db = float(snr_db)
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    return 10.0 ** (-snr_db / 20.0)
