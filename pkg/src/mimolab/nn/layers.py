"""Dense, batch-norm and embedding layers with hand-written backward passes.

Layers are stateless apart from parameters (and batch-norm running stats,
updated only in train mode): ``forward`` returns ``(y, cache)`` and
``backward(cache, dy)`` returns the input gradient while accumulating
parameter gradients in place.  This keeps trained models safe to share
across concurrent inference workers.  All arithmetic is float64.
"""

from __future__ import annotations

import numpy as np

from ..channel import SeededRng

BN_EPS = 1e-5
BN_MOMENTUM = 0.99


class Param:
    """A trainable array with an accumulated gradient."""

    def __init__(self, data: np.ndarray, name: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self.name = name

    def zero_grad(self):
        self.grad[...] = 0.0


def glorot_uniform(n_in: int, n_out: int, rng: SeededRng) -> np.ndarray:
    limit = np.sqrt(6.0 / (n_in + n_out))
    return (rng.uniform((n_in, n_out)) * 2.0 - 1.0) * limit


class Dense:
    """y = act(x @ W + b), activation 'relu' or 'linear'."""

    def __init__(self, n_in: int, n_out: int, activation: str = "linear",
                 rng: SeededRng | None = None, name: str = "dense"):
        if activation not in ("relu", "linear"):
            raise ValueError(f"unsupported activation: {activation!r}")
        self.n_in = n_in
        self.n_out = n_out
        self.activation = activation
        w0 = glorot_uniform(n_in, n_out, rng) if rng is not None else np.zeros((n_in, n_out))
        self.weight = Param(w0, f"{name}.W")
        self.bias = Param(np.zeros(n_out), f"{name}.b")

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray, train: bool = True):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"expected input (B, {self.n_in}), got {x.shape}")
        z = x @ self.weight.data + self.bias.data
        y = np.maximum(z, 0.0) if self.activation == "relu" else z
        return y, (x, z)

    def backward(self, cache, dy: np.ndarray) -> np.ndarray:
        x, z = cache
        dz = dy * (z > 0.0) if self.activation == "relu" else dy
        self.weight.grad += x.T @ dz
        self.bias.grad += dz.sum(axis=0)
        return dz @ self.weight.data.T


class BatchNorm:
    """Per-feature batch normalization with learned scale/shift and running stats."""

    def __init__(self, n_features: int, name: str = "bn"):
        self.n_features = n_features
        self.gamma = Param(np.ones(n_features), f"{name}.gamma")
        self.beta = Param(np.zeros(n_features), f"{name}.beta")
        self.running_mean = np.zeros(n_features)
        self.running_var = np.ones(n_features)

    def params(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]

    def forward(self, x: np.ndarray, train: bool = True):
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"expected input (B, {self.n_features}), got {x.shape}")
        if train:
            if x.shape[0] < 2:
                raise ValueError("batch norm needs a batch of at least 2 in train mode")
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            self.running_mean[...] = BN_MOMENTUM * self.running_mean + (1 - BN_MOMENTUM) * mean
            self.running_var[...] = BN_MOMENTUM * self.running_var + (1 - BN_MOMENTUM) * var
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mean) * inv_std
        y = self.gamma.data * xhat + self.beta.data
        return y, (xhat, inv_std, train)

    def backward(self, cache, dy: np.ndarray) -> np.ndarray:
        xhat, inv_std, train = cache
        self.gamma.grad += (dy * xhat).sum(axis=0)
        self.beta.grad += dy.sum(axis=0)
        dxhat = dy * self.gamma.data
        if not train:
            return dxhat * inv_std
        b = xhat.shape[0]
        # batch statistics couple the examples
        return (inv_std / b) * (b * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))


class Embedding:
    """Row lookup into a trainable table; gradients scatter-add into looked-up rows."""

    def __init__(self, num_entries: int, dim: int, rng: SeededRng | None = None,
                 name: str = "embed"):
        self.num_entries = num_entries
        self.dim = dim
        t0 = glorot_uniform(num_entries, dim, rng) if rng is not None else np.zeros((num_entries, dim))
        self.table = Param(t0, f"{name}.table")

    def params(self):
        return [self.table]

    def forward(self, indices: np.ndarray, train: bool = True):
        indices = np.asarray(indices, dtype=np.int64)
        if indices.ndim != 1:
            raise ValueError("indices must be a 1-D batch")
        if indices.min(initial=0) < 0 or indices.max(initial=0) >= self.num_entries:
            raise ValueError("embedding index out of range")
        return self.table.data[indices], indices

    def backward(self, cache, dy: np.ndarray) -> None:
        indices = cache
        np.add.at(self.table.grad, indices, dy)
        return None


def stack_params(layers) -> list[Param]:
    out = []
    for layer in layers:
        out.extend(layer.params())
    return out


def forward_stack(layers, x: np.ndarray, train: bool = True):
    caches = []
    for layer in layers:
        x, cache = layer.forward(x, train=train)
        caches.append(cache)
    return x, caches


def backward_stack(layers, caches, dy: np.ndarray) -> np.ndarray:
    for layer, cache in zip(reversed(layers), reversed(caches)):
        dy = layer.backward(cache, dy)
    return dy
