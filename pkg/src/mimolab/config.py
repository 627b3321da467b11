"""Experiment configuration dataclasses and their JSON file format.

A config file is a JSON object with the keys

    name      str, label used for output files
    dims      {"k", "m_t", "m_r", "n", "v"}  (v = 0 unless csi_mode is "discrete")
    csi_mode  "none" | "perfect" | "discrete"
    arch      {"embed_dim", "hidden", "depth", "classifier_hidden"}   (optional)
    train     {"batch_size", "steps", "eta", "train_snr_db", "seed",
               "loss", "lr_decay_at", "lr_decay_factor"}              (optional)

`train_snr_db` is either a number (fixed training SNR) or a [lo, hi] pair
sampled uniformly per example.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

CSI_MODES = ("none", "perfect", "discrete")


@dataclass(frozen=True)
class SystemDims:
    """Block dimensions: k message bits over m_t x n samples, m_r receive streams."""

    k: int
    m_t: int
    m_r: int
    n: int
    v: int = 0

    def __post_init__(self):
        if min(self.k, self.m_t, self.m_r, self.n) < 1:
            raise ConfigError("k, m_t, m_r, n must all be >= 1")
        if not 0 <= self.v <= 8:
            raise ConfigError("v must be in [0, 8]")

    @property
    def num_messages(self) -> int:
        return 2**self.k

    @property
    def csi_reals(self) -> int:
        return 2 * self.m_r * self.m_t


# presets matching the two systems studied: 2x1 diversity and 2x2 multiplexing
DIMS_2X1 = SystemDims(k=4, m_t=2, m_r=1, n=2)
DIMS_2X2 = SystemDims(k=4, m_t=2, m_r=2, n=1)


@dataclass(frozen=True)
class ArchConfig:
    embed_dim: int = 16
    hidden: int = 128
    depth: int = 2
    classifier_hidden: int = 128

    def __post_init__(self):
        if min(self.embed_dim, self.hidden, self.depth, self.classifier_hidden) < 1:
            raise ConfigError("architecture sizes must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 256
    steps: int = 100_000
    eta: float = 1e-3
    train_snr_db: float | tuple[float, float] = (0.0, 20.0)
    seed: int = 0
    loss: str = "binary_over_onehot"
    lr_decay_at: tuple[float, float] = (0.6, 0.85)
    lr_decay_factor: float = 0.1
    discrete_forward: str = "hard"

    def __post_init__(self):
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2 (batch norm)")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.eta <= 0:
            raise ConfigError("eta must be positive")
        if self.loss not in ("binary_over_onehot", "softmax_ce"):
            raise ConfigError(f"unknown loss {self.loss!r}")
        if self.discrete_forward not in ("hard", "annealed"):
            raise ConfigError("discrete_forward must be 'hard' or 'annealed'")
        snr = self.train_snr_db
        if isinstance(snr, (list, tuple)):
            if len(snr) != 2 or snr[0] > snr[1]:
                raise ConfigError("train_snr_db range must be [lo, hi]")
            object.__setattr__(self, "train_snr_db", (float(snr[0]), float(snr[1])))
        else:
            object.__setattr__(self, "train_snr_db", float(snr))
        object.__setattr__(self, "lr_decay_at", tuple(float(x) for x in self.lr_decay_at))


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    dims: SystemDims
    csi_mode: str
    arch: ArchConfig = field(default_factory=ArchConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.csi_mode not in CSI_MODES:
            raise ConfigError(f"csi_mode must be one of {CSI_MODES}")
        if self.csi_mode == "discrete" and not 1 <= self.dims.v <= 8:
            raise ConfigError("discrete csi_mode needs dims.v in [1, 8]")
        if self.csi_mode != "discrete" and self.dims.v != 0:
            raise ConfigError("dims.v must be 0 unless csi_mode is 'discrete'")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dims": dataclasses.asdict(self.dims),
            "csi_mode": self.csi_mode,
            "arch": dataclasses.asdict(self.arch),
            "train": dataclasses.asdict(self.train),
        }


def _build(cls, section: dict, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(section) - known
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"bad {where} section: {exc}") from exc


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    extra = set(raw) - {"name", "dims", "csi_mode", "arch", "train"}
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    for key in ("name", "dims", "csi_mode"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    dims = _build(SystemDims, raw["dims"], "dims")
    arch = _build(ArchConfig, raw.get("arch", {}), "arch")
    train = _build(TrainConfig, raw.get("train", {}), "train")
    return ExperimentConfig(name=str(raw["name"]), dims=dims, csi_mode=raw["csi_mode"],
                            arch=arch, train=train)


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
