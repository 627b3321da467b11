"""Classical reference systems: 2x1 Alamouti and 2x2 closed-loop SVD precoding.

Power convention: total transmit power is 1 per channel use, split equally
across antennas.  Alamouti therefore sends each symbol at amplitude
1/sqrt2, and the 2x2 chain carries two QPSK symbols scaled by 1/sqrt2.
Channels are held constant for ``symbols_per_subframe`` channel uses and
redrawn per subframe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import modem
from .channel import SeededRng, draw_rayleigh, snr_to_sigma
from .errors import DegenerateChannelError
from .linalg import svd
from .quantizer import QuantizerCodebook, quantize_csi

_SQRT2 = np.sqrt(2.0)
MIN_SINGULAR = 1e-9


@dataclass(frozen=True)
class SubframeProtocol:
    """Channel coherence model: one draw held for a block of channel uses."""

    num_subframes: int = 100
    symbols_per_subframe: int = 1000


def alamouti_encode(s1, s2) -> np.ndarray:
    """2 (antennas) x 2 (slots) grid [[s1, -s2*], [s2, s1*]] / sqrt2."""
    s1 = np.asarray(s1, dtype=np.complex128)
    s2 = np.asarray(s2, dtype=np.complex128)
    grid = np.array([[s1, -np.conj(s2)], [s2, np.conj(s1)]], dtype=np.complex128)
    return grid / _SQRT2


def alamouti_combine(r1, r2, h1, h2):
    """Orthogonality-based combining; exact ML for this code.

    Returns (s1_hat, s2_hat) with gain (|h1|^2+|h2|^2), still carrying the
    encoder-side 1/sqrt2.
    """
    h1 = np.asarray(h1, dtype=np.complex128)
    h2 = np.asarray(h2, dtype=np.complex128)
    if np.all(h1 == 0) and np.all(h2 == 0):
        raise DegenerateChannelError("all-zero 2x1 channel")
    s1 = np.conj(h1) * r1 + h2 * np.conj(r2)
    s2 = np.conj(h2) * r1 - h1 * np.conj(r2)
    return s1, s2


def simulate_alamouti_point(
    snr_db: float,
    rng: SeededRng,
    min_bits: int,
    min_errors: int,
    bit_cap: int,
    protocol: SubframeProtocol = SubframeProtocol(),
) -> tuple[int, int]:
    """Monte Carlo 2x1 Alamouti QPSK over Rayleigh; returns (bit_errors, bits)."""
    sigma = snr_to_sigma(snr_db)
    blocks = protocol.symbols_per_subframe // 2  # one block spans two slots
    bits_per_subframe = 4 * blocks
    errors = 0
    bits = 0
    while bits < min_bits or (errors < min_errors and bits < bit_cap):
        h = draw_rayleigh(1, 2, rng)
        h1, h2 = h[0, 0], h[0, 1]
        tx_bits = rng.integers(2, size=bits_per_subframe)
        sym = modem.qpsk_modulate(tx_bits)
        s1, s2 = sym[0::2], sym[1::2]
        n1 = sigma * rng.cnormal(blocks)
        n2 = sigma * rng.cnormal(blocks)
        r1 = (h1 * s1 + h2 * s2) / _SQRT2 + n1
        r2 = (-h1 * np.conj(s2) + h2 * np.conj(s1)) / _SQRT2 + n2
        if h1 == 0 and h2 == 0:  # probability zero; counted, not crashed
            continue
        g1, g2 = alamouti_combine(r1, r2, h1, h2)
        est = np.empty(2 * blocks, dtype=np.complex128)
        est[0::2] = g1
        est[1::2] = g2
        rx_bits = modem.qpsk_demodulate(est)
        errors += int(np.sum(rx_bits != tx_bits))
        bits += bits_per_subframe
    return errors, bits


def simulate_alamouti_iid(snr_db: float, rng: SeededRng, num_blocks: int,
                          chunk: int = 100_000) -> np.ndarray:
    """Alamouti with a fresh channel per block; returns per-block bit error counts.

    This is the configuration the closed-form fading average describes, so
    per-block counts give well-calibrated standard errors for oracle
    comparisons (unlike the long-coherence subframe protocol, where bits
    within a subframe share one fade).
    """
    sigma = snr_to_sigma(snr_db)
    out = np.empty(num_blocks, dtype=np.int64)
    done = 0
    while done < num_blocks:
        c = min(chunk, num_blocks - done)
        h = rng.cnormal((c, 2))
        tx_bits = rng.integers(2, size=4 * c)
        sym = modem.qpsk_modulate(tx_bits)
        s1, s2 = sym[0::2], sym[1::2]
        n1 = sigma * rng.cnormal(c)
        n2 = sigma * rng.cnormal(c)
        r1 = (h[:, 0] * s1 + h[:, 1] * s2) / _SQRT2 + n1
        r2 = (-h[:, 0] * np.conj(s2) + h[:, 1] * np.conj(s1)) / _SQRT2 + n2
        g1, g2 = alamouti_combine(r1, r2, h[:, 0], h[:, 1])
        est = np.empty(2 * c, dtype=np.complex128)
        est[0::2] = g1
        est[1::2] = g2
        rx_bits = modem.qpsk_demodulate(est)
        out[done : done + c] = (rx_bits != tx_bits).reshape(c, 4).sum(axis=1)
        done += c
    return out


def svd_closed_loop_tx(s: np.ndarray, h: np.ndarray):
    """Precode a symbol vector with the right singular vectors of the channel.

    Returns (x, factors) where factors is the SvdResult reused at the
    receiver; raises DegenerateChannelError when the channel is numerically
    singular (the caller records the subframe as an outage).
    """
    factors = svd(h)
    if factors.sigma.min() <= MIN_SINGULAR:
        raise DegenerateChannelError("near-singular channel: min singular value too small")
    return factors.v @ s, factors


def svd_closed_loop_rx(
    y: np.ndarray,
    factors,
    mode: str = "zf",
    sigma: float | None = None,
) -> np.ndarray:
    """Diagonalize with U* and equalize each eigenchannel.

    ZF divides by the singular value; MMSE applies the Wiener scaling
    lam/(lam^2 + sigma^2) and requires `sigma`.
    """
    y_tilde = factors.u.conj().T @ y
    lam = factors.sigma.reshape(-1, *([1] * (y_tilde.ndim - 1)))
    if mode == "zf":
        return y_tilde / lam
    if mode == "mmse":
        if sigma is None:
            raise ValueError("mmse equalizer needs the noise deviation sigma")
        return lam * y_tilde / (lam**2 + float(sigma) ** 2)
    raise ValueError(f"unknown equalizer mode: {mode!r}")


def simulate_svd_point(
    snr_db: float,
    rng: SeededRng,
    min_bits: int,
    min_errors: int,
    bit_cap: int,
    mode: str = "zf",
    codebook: QuantizerCodebook | None = None,
    protocol: SubframeProtocol = SubframeProtocol(),
) -> tuple[int, int]:
    """Monte Carlo 2x2 closed-loop QPSK over Rayleigh; returns (bit_errors, bits).

    With a codebook, the transmitter precodes with the SVD of the
    dequantized channel while the receiver keeps its perfect CSI, which is
    the quantized-feedback impairment model.
    """
    sigma = snr_to_sigma(snr_db)
    slots = protocol.symbols_per_subframe
    bits_per_subframe = 4 * slots
    errors = 0
    bits = 0
    while bits < min_bits or (errors < min_errors and bits < bit_cap):
        h = draw_rayleigh(2, 2, rng)
        tx_bits = rng.integers(2, size=bits_per_subframe)
        sym = modem.qpsk_modulate(tx_bits).reshape(-1, 2).T / _SQRT2  # (2, slots)
        try:
            if codebook is None:
                x, factors = svd_closed_loop_tx(sym, h)
            else:
                _, hq = quantize_csi(h, codebook)
                xq, _ = svd_closed_loop_tx(sym, hq)
                x = xq
                factors = svd(h)
                if factors.sigma.min() <= MIN_SINGULAR:
                    raise DegenerateChannelError("near-singular channel")
        except DegenerateChannelError:
            continue  # outage subframe: skipped and redrawn
        noise = sigma * rng.cnormal((2, slots))
        y = h @ x + noise
        est = svd_closed_loop_rx(y, factors, mode=mode, sigma=sigma)
        rx_bits = modem.qpsk_demodulate(est.T.reshape(-1))
        errors += int(np.sum(rx_bits != tx_bits))
        bits += bits_per_subframe
    return errors, bits
