"""MIMO physical-layer lab: classical baselines, learned block codes, BER harness."""

from . import ae, baselines, channel, config, harness, linalg, modem, nn, quantizer
from .errors import ConfigError, DegenerateChannelError, NumericError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateChannelError",
    "NumericError",
    "ae",
    "baselines",
    "channel",
    "config",
    "harness",
    "linalg",
    "modem",
    "nn",
    "quantizer",
]
