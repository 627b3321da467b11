from .models import (
    AeModel,
    awgn_layer_backward,
    awgn_layer_forward,
    backward_full,
    build_discrete_csi,
    build_model,
    build_open_loop,
    build_perfect_csi,
    channel_backward,
    channel_forward,
    csi_class_index,
    csi_features,
    feedback_roundtrip,
    forward_full,
    infer,
    load_checkpoint,
    power_normalize_backward,
    power_normalize_forward,
    receive_decode,
    save_checkpoint,
    transmit_blocks,
)
from .train import TrainResult, train

__all__ = [
    "AeModel",
    "TrainResult",
    "awgn_layer_backward",
    "awgn_layer_forward",
    "backward_full",
    "build_discrete_csi",
    "build_model",
    "build_open_loop",
    "build_perfect_csi",
    "channel_backward",
    "channel_forward",
    "csi_class_index",
    "csi_features",
    "feedback_roundtrip",
    "forward_full",
    "infer",
    "load_checkpoint",
    "power_normalize_backward",
    "power_normalize_forward",
    "receive_decode",
    "save_checkpoint",
    "train",
    "transmit_blocks",
]
