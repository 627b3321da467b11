"""Command-line entry point.

Subcommands: train, eval-ae, eval-baseline, quantizer, constellation,
compare.  Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .ae.models import build_model, load_checkpoint, save_checkpoint
from .ae.train import train as train_model
from .channel import SeededRng, snr_to_sigma
from .config import load_config
from .errors import ConfigError, NumericError
from .quantizer import train_csi_codebook

DEFAULT_SNR_MIN = -5.0
DEFAULT_SNR_MAX = 30.0
DEFAULT_SNR_STEP = 2.5
DEFAULT_MIN_BITS = 1_000_000
DEFAULT_MIN_ERRORS = 100


def _snr_grid(args) -> list[float]:
    if args.snr_max < args.snr_min or args.snr_step <= 0:
        raise ConfigError("need snr-min <= snr-max and snr-step > 0")
    n = int(round((args.snr_max - args.snr_min) / args.snr_step)) + 1
    return [args.snr_min + i * args.snr_step for i in range(n)]


def _add_sweep_flags(p: argparse.ArgumentParser):
    p.add_argument("--snr-min", type=float, default=DEFAULT_SNR_MIN)
    p.add_argument("--snr-max", type=float, default=DEFAULT_SNR_MAX)
    p.add_argument("--snr-step", type=float, default=DEFAULT_SNR_STEP)
    p.add_argument("--min-bits", type=int, default=DEFAULT_MIN_BITS)
    p.add_argument("--min-errors", type=int, default=DEFAULT_MIN_ERRORS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results"))


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        import dataclasses

        cfg = dataclasses.replace(cfg, train=dataclasses.replace(cfg.train, seed=args.seed))
    model = build_model(cfg)
    print(f"training {cfg.name!r}: {cfg.train.steps} steps, batch {cfg.train.batch_size}")
    result = train_model(model, progress=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / f"{cfg.name}.ckpt"
    save_checkpoint(model, ckpt)
    tail = result.loss_trace[-min(1000, len(result.loss_trace)):]
    log = {
        "name": cfg.name,
        "steps": int(cfg.train.steps),
        "initial_loss": float(result.loss_trace[0]),
        "final_loss_mean_1k": float(tail.mean()),
        "max_power_error": float(result.power_error_trace.max()),
    }
    (out / f"{cfg.name}.train.json").write_text(json.dumps(log, indent=2, sort_keys=True) + "\n")
    np.savetxt(out / f"{cfg.name}.loss.csv", result.loss_trace, fmt="%.8e",
               header="loss", comments="")
    print(f"checkpoint: {ckpt}")
    print(f"loss {log['initial_loss']:.4f} -> {log['final_loss_mean_1k']:.4f} (1k-step mean)")
    return 0


def cmd_eval_ae(args) -> int:
    model = load_checkpoint(args.checkpoint)
    grid = _snr_grid(args)
    label = f"ae-{model.config.name}"
    curve = harness.ber_sweep(harness.ae_system(model), grid, args.min_bits,
                              args.min_errors, args.seed, label, workers=args.workers)
    csv_path = harness.export_curve(curve, args.out, label,
                                    extra={"seed": args.seed, "min_bits": args.min_bits,
                                           "min_errors": args.min_errors})
    for p in curve.points:
        print(f"  snr {p.snr_db:6.1f} dB   ber {p.ber:.5e}   ({p.bit_errors}/{p.bits_counted})")
    print(f"wrote {csv_path}")
    return 0


def cmd_eval_baseline(args) -> int:
    grid = _snr_grid(args)
    if args.scheme == "alamouti":
        system = harness.alamouti_system()
        label = "baseline-alamouti-2x1"
    elif args.scheme == "svd":
        codebook = None
        label = f"baseline-svd-{args.equalizer}-2x2"
        if args.csi_bits:
            codebook = train_csi_codebook(args.csi_bits, SeededRng(args.seed, 7))
            label += f"-q{args.csi_bits}"
        system = harness.svd_system(mode=args.equalizer, codebook=codebook)
    else:  # argparse choices guard this
        raise ConfigError(f"unknown scheme {args.scheme!r}")
    curve = harness.ber_sweep(system, grid, args.min_bits, args.min_errors,
                              args.seed, label, workers=args.workers)
    csv_path = harness.export_curve(curve, args.out, label,
                                    extra={"seed": args.seed, "min_bits": args.min_bits,
                                           "min_errors": args.min_errors})
    for p in curve.points:
        print(f"  snr {p.snr_db:6.1f} dB   ber {p.ber:.5e}   ({p.bit_errors}/{p.bits_counted})")
    print(f"wrote {csv_path}")
    return 0


def cmd_quantizer(args) -> int:
    rng = SeededRng(args.seed, 7)
    cb = train_csi_codebook(args.bits, rng, num_samples=args.samples,
                            train_sigma=args.train_sigma)
    payload = {
        "v": cb.v,
        "train_sigma": args.train_sigma,
        "levels": [float(x) for x in cb.levels],
        "boundaries": [float(x) for x in cb.boundaries],
        "final_distortion": cb.distortion_trace[-1],
        "iterations": len(cb.distortion_trace) - 1,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_constellation(args) -> int:
    rng = SeededRng(args.seed, 11)
    sigma = snr_to_sigma(args.snr_db)
    if args.checkpoint:
        model = load_checkpoint(args.checkpoint)
        dump = harness.export_constellation_ae(model, args.channel_case,
                                               args.num_draws, sigma, rng)
    else:
        dump = harness.export_constellation_baseline(args.channel_case,
                                                     args.num_draws, sigma, rng)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    harness.export_constellation_json(dump, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    report = harness.compare_curves(args.csv_a, args.csv_b)
    print(harness.format_comparison(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimolab",
                                     description="MIMO baselines, learned systems and BER sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval-ae", help="BER sweep for a trained checkpoint")
    p.add_argument("--checkpoint", type=Path, required=True)
    _add_sweep_flags(p)
    p.set_defaults(fn=cmd_eval_ae)

    p = sub.add_parser("eval-baseline", help="BER sweep for a classical scheme")
    p.add_argument("--scheme", choices=["alamouti", "svd"], required=True)
    p.add_argument("--equalizer", choices=["zf", "mmse"], default="zf")
    p.add_argument("--csi-bits", type=int, default=0,
                   help="quantize the transmitter CSI to this many bits per component")
    _add_sweep_flags(p)
    p.set_defaults(fn=cmd_eval_baseline)

    p = sub.add_parser("quantizer", help="train and inspect a Lloyd codebook")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--train-sigma", type=float, default=1.0 / np.sqrt(2.0))
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(fn=cmd_quantizer)

    p = sub.add_parser("constellation", help="dump tx/rx constellation points as JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", type=Path)
    group.add_argument("--baseline", action="store_true")
    p.add_argument("--channel-case", choices=list(harness.CHANNEL_CASES), default="random")
    p.add_argument("--num-draws", type=int, default=16)
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(fn=cmd_constellation)

    p = sub.add_parser("compare", help="per-point significance report for two curve CSVs")
    p.add_argument("csv_a", type=Path)
    p.add_argument("csv_b", type=Path)
    p.set_defaults(fn=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
