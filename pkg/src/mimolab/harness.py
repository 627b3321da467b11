"""Monte Carlo BER sweeps, CSV/JSON emission and constellation dumps.

Each sweep point runs on its own random stream keyed by (seed, point
index), so sweeps parallelized over points are identical to serial runs.
A point accumulates bits until `min_bits` is reached and then continues
until `min_errors` bit errors have been seen or the bit cap (100x
min_bits) is hit, which keeps low-BER points statistically meaningful.

CSV format: header ``snr,ber``, one point per line, SNR in decibels and
BER in 6-significant-digit scientific notation (``10,1.23000e-3``).  A
JSON sidecar with the same stem carries exact counts and the per-point
standard error sqrt(ber*(1-ber)/bits).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines
from .ae.models import AeModel, awgn_layer_forward, channel_forward, infer, transmit_blocks
from .channel import SeededRng, draw_rayleigh_batch, snr_to_sigma
from .modem import QPSK_POINTS, index_to_bits, qpsk_modulate
from .quantizer import QuantizerCodebook

_POINT_STREAM_BASE = 1000
BIT_CAP_FACTOR = 100
AE_EVAL_BATCH = 8192

CHANNEL_CASES = ("random", "diagonal", "all_ones")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    ber: float
    bits_counted: int
    bit_errors: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.ber * (1.0 - self.ber) / self.bits_counted)


@dataclass(frozen=True)
class BerCurve:
    label: str
    points: tuple[BerPoint, ...]

    def __post_init__(self):
        snrs = [p.snr_db for p in self.points]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("snr points must be strictly ascending")
        for p in self.points:
            if p.bits_counted > 0 and p.ber != p.bit_errors / p.bits_counted:
                raise ValueError("ber must equal bit_errors / bits_counted")

    def bers(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    def stderrs(self) -> np.ndarray:
        return np.array([p.stderr for p in self.points])


def count_bit_errors(sent: np.ndarray, decoded: np.ndarray, k: int) -> int:
    """Summed Hamming distance between natural-binary k-bit expansions."""
    sent = np.asarray(sent, dtype=np.int64)
    decoded = np.asarray(decoded, dtype=np.int64)
    if sent.shape != decoded.shape:
        raise ValueError("index streams must have equal length")
    diff = sent ^ decoded
    errors = 0
    for shift in range(k):
        errors += int(((diff >> shift) & 1).sum())
    return errors


def ber_sweep(system, snr_points, min_bits: int, min_errors: int, seed: int,
              label: str, workers: int = 1) -> BerCurve:
    """Run `system` at each SNR point; `system(snr_db, rng, min_bits, min_errors, cap)`
    must return (bit_errors, bits_counted)."""
    snr_points = [float(s) for s in snr_points]
    if min_bits < 10_000:
        raise ValueError("min_bits must be at least 10**4")
    if any(b <= a for a, b in zip(snr_points, snr_points[1:])):
        raise ValueError("snr points must be strictly ascending")
    cap = BIT_CAP_FACTOR * min_bits

    def run_point(i: int) -> BerPoint:
        rng = SeededRng(seed, _POINT_STREAM_BASE + i)
        errors, bits = system(snr_points[i], rng, min_bits, min_errors, cap)
        return BerPoint(snr_db=snr_points[i], ber=errors / bits,
                        bits_counted=bits, bit_errors=errors)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(run_point, range(len(snr_points))))
    else:
        points = [run_point(i) for i in range(len(snr_points))]
    return BerCurve(label=label, points=tuple(points))


# ---------------------------------------------------------------------------
# systems


def alamouti_system():
    return baselines.simulate_alamouti_point


def svd_system(mode: str = "zf", codebook: QuantizerCodebook | None = None):
    def run(snr_db, rng, min_bits, min_errors, cap):
        return baselines.simulate_svd_point(snr_db, rng, min_bits, min_errors, cap,
                                            mode=mode, codebook=codebook)

    return run


def ae_system(model: AeModel, batch: int = AE_EVAL_BATCH):
    """Evaluate a trained model with one fresh channel per codeword."""
    dims = model.dims

    def run(snr_db, rng, min_bits, min_errors, cap):
        sigma = snr_to_sigma(snr_db)
        errors = 0
        bits = 0
        while bits < min_bits or (errors < min_errors and bits < cap):
            s = rng.integers(dims.num_messages, batch)
            h = draw_rayleigh_batch(batch, dims.m_r, dims.m_t, rng)
            s_hat = infer(model, s, h, sigma, rng)
            errors += count_bit_errors(s, s_hat, dims.k)
            bits += batch * dims.k
        return errors, bits

    return run


# ---------------------------------------------------------------------------
# CSV / JSON emission


def _format_ber(ber: float) -> str:
    if ber == 0.0:
        return "0.00000e0"
    exp = math.floor(math.log10(abs(ber)))
    mantissa = ber / 10.0**exp
    # guard against 9.999995 rounding up to 10.0
    if round(mantissa, 5) >= 10.0:
        mantissa /= 10.0
        exp += 1
    return f"{mantissa:.5f}e{exp}"


def export_csv(curve: BerCurve, path) -> None:
    lines = ["snr,ber"]
    for p in curve.points:
        lines.append(f"{p.snr_db:g},{_format_ber(p.ber)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_csv(path) -> list[tuple[float, float]]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "snr,ber":
        raise ValueError(f"{path} is not a ber curve csv")
    out = []
    for line in lines[1:]:
        snr, ber = line.split(",")
        out.append((float(snr), float(ber)))
    return out


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def export_sidecar(curve: BerCurve, csv_path, extra: dict | None = None) -> None:
    payload = {
        "label": curve.label,
        "points": [
            {
                "snr_db": p.snr_db,
                "ber": p.ber,
                "bits": p.bits_counted,
                "errors": p.bit_errors,
                "stderr": p.stderr,
            }
            for p in curve.points
        ],
    }
    if extra:
        payload.update(extra)
    sidecar_path(csv_path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


def load_sidecar(csv_path) -> dict:
    return json.loads(sidecar_path(csv_path).read_text())


def export_curve(curve: BerCurve, out_dir, stem: str, extra: dict | None = None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    export_csv(curve, csv_path)
    export_sidecar(curve, csv_path, extra)
    return csv_path


# ---------------------------------------------------------------------------
# constellation dumps


def _case_channels(channel_case: str, dims_mr: int, dims_mt: int, num_draws: int,
                   rng: SeededRng) -> np.ndarray:
    if channel_case == "random":
        return draw_rayleigh_batch(num_draws, dims_mr, dims_mt, rng)
    if channel_case == "diagonal":
        return np.broadcast_to(np.eye(dims_mr, dims_mt, dtype=np.complex128),
                               (1, dims_mr, dims_mt)).copy()
    if channel_case == "all_ones":
        return np.ones((1, dims_mr, dims_mt), dtype=np.complex128)
    raise ValueError(f"channel_case must be one of {CHANNEL_CASES}")


def _points_per_antenna(arr_c: np.ndarray) -> list[list[list[float]]]:
    """(N, antennas, samples) complex -> per-antenna [re, im] lists."""
    out = []
    for a in range(arr_c.shape[1]):
        pts = arr_c[:, a, :].reshape(-1)
        out.append([[float(z.real), float(z.imag)] for z in pts])
    return out


def export_constellation_ae(model: AeModel, channel_case: str, num_draws: int,
                            sigma: float, rng: SeededRng) -> dict:
    """Transmit/receive points for every message index under a channel case."""
    dims = model.dims
    hs = _case_channels(channel_case, dims.m_r, dims.m_t, num_draws, rng)
    messages = np.arange(dims.num_messages)
    s = np.tile(messages, hs.shape[0])
    h = np.repeat(hs, dims.num_messages, axis=0)
    x = transmit_blocks(model, s, h)
    y = awgn_layer_forward(channel_forward(x, h), sigma, rng)
    xc = x[:, :, 0, :] + 1j * x[:, :, 1, :]
    yc = y[:, :, 0, :] + 1j * y[:, :, 1, :]
    return {
        "scheme": f"ae-{model.config.name}",
        "channel_case": channel_case,
        "snr_sigma": float(sigma),
        "messages": [int(m) for m in s],
        "tx_points": _points_per_antenna(xc),
        "rx_points": _points_per_antenna(yc),
    }


def export_constellation_baseline(channel_case: str, num_draws: int, sigma: float,
                                  rng: SeededRng, scheme: str = "svd-zf") -> dict:
    """Per-antenna slicer-view constellation for the 2x2 QPSK baseline.

    Transmit points are the unit-energy Gray constellation per antenna;
    receive points are the equalizer outputs rescaled by sqrt2 to undo the
    documented per-antenna power split, so rx equals tx for a noiseless
    identity channel.
    """
    if scheme != "svd-zf":
        raise ValueError("baseline constellation supports scheme 'svd-zf'")
    hs = _case_channels(channel_case, 2, 2, num_draws, rng)
    messages = np.arange(16)
    bits = index_to_bits(messages, 4)
    sym = qpsk_modulate(bits).reshape(-1, 2).T  # (2, 16) antenna-major
    tx_list = []
    rx_list = []
    for h in hs:
        x, factors = baselines.svd_closed_loop_tx(sym / np.sqrt(2.0), h)
        y = h @ x
        y = y + sigma * rng.cnormal(y.shape)
        est = baselines.svd_closed_loop_rx(y, factors, mode="zf") * np.sqrt(2.0)
        tx_list.append(sym.T[:, :, None])  # (16, 2, 1)
        rx_list.append(est.T[:, :, None])
    tx = np.concatenate(tx_list, axis=0)
    rx = np.concatenate(rx_list, axis=0)
    return {
        "scheme": "baseline-qpsk-svd-zf",
        "channel_case": channel_case,
        "snr_sigma": float(sigma),
        "messages": [int(m) for m in np.tile(messages, hs.shape[0])],
        "tx_points": _points_per_antenna(tx),
        "rx_points": _points_per_antenna(rx),
    }


def export_constellation_json(dump: dict, path) -> None:
    Path(path).write_text(json.dumps(dump, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# curve comparison


def compare_curves(csv_a, csv_b) -> dict:
    """Per-point significance report for two exported curves (needs sidecars)."""
    side_a = load_sidecar(csv_a)
    side_b = load_sidecar(csv_b)
    by_snr_b = {p["snr_db"]: p for p in side_b["points"]}
    rows = []
    for pa in side_a["points"]:
        pb = by_snr_b.get(pa["snr_db"])
        if pb is None:
            continue
        delta = pa["ber"] - pb["ber"]
        se = math.sqrt(pa["stderr"] ** 2 + pb["stderr"] ** 2)
        z = delta / se if se > 0 else (0.0 if delta == 0 else math.inf * np.sign(delta))
        rows.append({
            "snr_db": pa["snr_db"],
            "ber_a": pa["ber"],
            "ber_b": pb["ber"],
            "delta": delta,
            "stderr": se,
            "z": z,
            "significant": abs(z) > 2.0,
        })
    return {"label_a": side_a["label"], "label_b": side_b["label"], "points": rows}


def format_comparison(report: dict) -> str:
    lines = [
        f"A = {report['label_a']}",
        f"B = {report['label_b']}",
        f"{'snr_db':>8} {'ber_a':>12} {'ber_b':>12} {'z':>8}  verdict",
    ]
    for row in report["points"]:
        if row["significant"]:
            verdict = "A worse" if row["delta"] > 0 else "A better"
        else:
            verdict = "tie (within 2 se)"
        lines.append(
            f"{row['snr_db']:>8g} {row['ber_a']:>12.5e} {row['ber_b']:>12.5e} "
            f"{row['z']:>8.2f}  {verdict}"
        )
    return "\n".join(lines)
