from .layers import BatchNorm, Dense, Embedding, Param, backward_stack, forward_stack, stack_params
from .losses import binary_over_onehot, get_loss, random_guess_loss, softmax, softmax_ce
from .optim import Adam
from .serialize import load_arrays, save_arrays

__all__ = [
    "Adam",
    "BatchNorm",
    "Dense",
    "Embedding",
    "Param",
    "backward_stack",
    "binary_over_onehot",
    "forward_stack",
    "get_loss",
    "load_arrays",
    "random_guess_loss",
    "save_arrays",
    "softmax",
    "softmax_ce",
    "stack_params",
]
