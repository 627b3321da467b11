"""Learned MIMO block codes: open-loop, perfect-CSI and discrete-CSI systems.

A model maps a message index through an embedding and a dense encoder to
an (m_t, 2, n) real/imag block, normalizes batch-average power to 1,
passes the block through a per-example complex channel matrix plus AWGN,
and decodes the received (m_r, 2, n) block back to 2**k logits.  The
closed-loop variants additionally feed the transmitter-side encoder either
the raw channel components (perfect CSI) or a hard one-hot channel class
produced by a small classifier (discrete CSI, straight-through gradient).

The decoder never sees CSI; at deployment the classifier runs at the
receiver and only the v-bit class index is fed back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import SeededRng
from ..config import ArchConfig, ExperimentConfig, SystemDims, config_from_dict
from ..nn import (
    BatchNorm,
    Dense,
    Embedding,
    backward_stack,
    forward_stack,
    softmax,
    stack_params,
)
from ..nn.serialize import load_arrays, save_arrays

_INIT_STREAM = 1
CSI_SCALE = np.sqrt(2.0)  # channel components are N(0, 1/2); this whitens them


@dataclass
class AeModel:
    config: ExperimentConfig
    embedding: Embedding
    encoder: list
    decoder: list
    csi_classifier: list | None

    @property
    def dims(self) -> SystemDims:
        return self.config.dims

    @property
    def csi_mode(self) -> str:
        return self.config.csi_mode

    def parameters(self):
        params = self.embedding.params() + stack_params(self.encoder) + stack_params(self.decoder)
        if self.csi_classifier is not None:
            params += stack_params(self.csi_classifier)
        return params

    def named_arrays(self):
        """All state (params and batch-norm buffers) with stable names."""
        out = [("embedding.table", self.embedding.table.data)]
        for prefix, stack in self._stacks():
            for i, layer in enumerate(stack):
                if isinstance(layer, Dense):
                    out.append((f"{prefix}.{i}.W", layer.weight.data))
                    out.append((f"{prefix}.{i}.b", layer.bias.data))
                elif isinstance(layer, BatchNorm):
                    out.append((f"{prefix}.{i}.gamma", layer.gamma.data))
                    out.append((f"{prefix}.{i}.beta", layer.beta.data))
                    out.append((f"{prefix}.{i}.running_mean", layer.running_mean))
                    out.append((f"{prefix}.{i}.running_var", layer.running_var))
        return out

    def _stacks(self):
        stacks = [("encoder", self.encoder), ("decoder", self.decoder)]
        if self.csi_classifier is not None:
            stacks.append(("classifier", self.csi_classifier))
        return stacks


def _mlp(n_in: int, hidden: int, depth: int, n_out: int, rng: SeededRng, name: str,
         batchnorm: bool = True) -> list:
    layers = []
    width = n_in
    for i in range(depth):
        layers.append(Dense(width, hidden, activation="relu", rng=rng, name=f"{name}.{2 * i}"))
        if batchnorm:
            layers.append(BatchNorm(hidden, name=f"{name}.{2 * i + 1}"))
        width = hidden
    layers.append(Dense(width, n_out, activation="linear", rng=rng, name=f"{name}.out"))
    return layers


def _encoder_input_width(cfg: ExperimentConfig) -> int:
    d = cfg.arch.embed_dim
    if cfg.csi_mode == "perfect":
        return d + cfg.dims.csi_reals
    if cfg.csi_mode == "discrete":
        return d + 2**cfg.dims.v
    return d


def build_model(cfg: ExperimentConfig) -> AeModel:
    """Construct a freshly initialized model for a config (weights seeded by cfg.train.seed)."""
    dims, arch = cfg.dims, cfg.arch
    rng = SeededRng(cfg.train.seed, _INIT_STREAM)
    embedding = Embedding(dims.num_messages, arch.embed_dim, rng=rng, name="embedding")
    encoder = _mlp(_encoder_input_width(cfg), arch.hidden, arch.depth,
                   2 * dims.m_t * dims.n, rng, "encoder")
    decoder = _mlp(2 * dims.m_r * dims.n, arch.hidden, arch.depth,
                   dims.num_messages, rng, "decoder")
    classifier = None
    if cfg.csi_mode == "discrete":
        classifier = _mlp(dims.csi_reals, arch.classifier_hidden, arch.depth,
                          2**dims.v, rng, "classifier", batchnorm=False)
    return AeModel(config=cfg, embedding=embedding, encoder=encoder,
                   decoder=decoder, csi_classifier=classifier)


def build_open_loop(dims: SystemDims, arch: ArchConfig | None = None, seed: int = 0,
                    name: str = "open-loop") -> AeModel:
    from ..config import TrainConfig

    cfg = ExperimentConfig(name=name, dims=dims, csi_mode="none",
                           arch=arch or ArchConfig(), train=TrainConfig(seed=seed))
    return build_model(cfg)


def build_perfect_csi(dims: SystemDims, arch: ArchConfig | None = None, seed: int = 0,
                      name: str = "perfect-csi") -> AeModel:
    from ..config import TrainConfig

    cfg = ExperimentConfig(name=name, dims=dims, csi_mode="perfect",
                           arch=arch or ArchConfig(), train=TrainConfig(seed=seed))
    return build_model(cfg)


def build_discrete_csi(dims: SystemDims, arch: ArchConfig | None = None, seed: int = 0,
                       name: str = "discrete-csi") -> AeModel:
    from ..config import TrainConfig

    if not 1 <= dims.v <= 8:
        raise ValueError("discrete CSI needs dims.v in [1, 8]")
    cfg = ExperimentConfig(name=name, dims=dims, csi_mode="discrete",
                           arch=arch or ArchConfig(), train=TrainConfig(seed=seed))
    return build_model(cfg)


# ---------------------------------------------------------------------------
# differentiable channel-path layers


def power_normalize_forward(x: np.ndarray, complex_entries: int):
    """Scale so the batch-mean complex-entry power is 1; returns (y, cache)."""
    power = float((x * x).sum()) / complex_entries
    if power == 0.0:
        raise ValueError("all-zero transmit batch")
    scale = 1.0 / np.sqrt(power)
    return x * scale, (x, power, scale, complex_entries)


def power_normalize_backward(cache, dy: np.ndarray) -> np.ndarray:
    x, power, scale, m = cache
    gx = float((dy * x).sum())
    return dy * scale - x * (gx / (m * power ** 1.5))


def channel_forward(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Per-sample complex product on the real/imag-split block tensor.

    x: (B, m_t, 2, n) real; h: (B, m_r, m_t) complex -> (B, m_r, 2, n) real.
    """
    xc = x[:, :, 0, :] + 1j * x[:, :, 1, :]
    yc = h @ xc
    return np.stack([yc.real, yc.imag], axis=2)


def channel_backward(h: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Adjoint of channel_forward: multiplication by the conjugate transpose."""
    dyc = dy[:, :, 0, :] + 1j * dy[:, :, 1, :]
    dxc = np.conj(np.swapaxes(h, 1, 2)) @ dyc
    return np.stack([dxc.real, dxc.imag], axis=2)


def awgn_layer_forward(x: np.ndarray, sigma, rng: SeededRng) -> np.ndarray:
    """Additive complex Gaussian noise on the split tensor; backward is identity."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    b, m_r, _, n = x.shape
    noise_c = rng.cnormal((b, m_r, n))
    noise = np.stack([noise_c.real, noise_c.imag], axis=2)
    if sigma.ndim > 0:
        sigma = sigma.reshape(-1, 1, 1, 1)
    return x + sigma * noise


# backward of the awgn layer: gradients pass through unchanged
def awgn_layer_backward(dy: np.ndarray) -> np.ndarray:
    return dy


def csi_features(h: np.ndarray) -> np.ndarray:
    """Flatten a channel batch (B, m_r, m_t) to whitened real components (B, 2*m_r*m_t)."""
    flat = h.reshape(h.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=1) * CSI_SCALE


# ---------------------------------------------------------------------------
# full forward/backward


@dataclass
class ForwardCache:
    emb_cache: object
    cls_caches: object
    q: np.ndarray | None
    st_temperature: float | None
    enc_caches: list
    norm_cache: tuple
    h: np.ndarray
    dec_caches: list
    embed_dim: int
    post_norm_power: float


def forward_full(model: AeModel, s: np.ndarray, h: np.ndarray, sigma, rng: SeededRng,
                 train: bool = True,
                 st_temperature: float | None = None) -> tuple[np.ndarray, ForwardCache]:
    """Run message indices through the complete system; returns (logits, cache).

    For discrete CSI the default forward presents the encoder with the
    hard one-hot channel class (straight-through gradients).  Passing
    `st_temperature` switches to a tempered softmax forward instead, the
    annealing alternative; inference always selects hard.
    """
    dims = model.dims
    b = len(s)
    emb, emb_cache = model.embedding.forward(np.asarray(s), train=train)

    cls_caches = None
    q = None
    if model.csi_mode == "none":
        enc_in = emb
    elif model.csi_mode == "perfect":
        enc_in = np.concatenate([emb, csi_features(h)], axis=1)
    else:
        q_logits, cls_caches = forward_stack(model.csi_classifier, csi_features(h), train=train)
        if st_temperature is not None and train:
            q = softmax(q_logits / st_temperature)
            enc_in = np.concatenate([emb, q], axis=1)
        else:
            q = softmax(q_logits)
            hard = np.zeros_like(q)
            hard[np.arange(b), q.argmax(axis=1)] = 1.0
            enc_in = np.concatenate([emb, hard], axis=1)

    enc_out, enc_caches = forward_stack(model.encoder, enc_in, train=train)
    x = enc_out.reshape(b, dims.m_t, 2, dims.n)
    xn, norm_cache = power_normalize_forward(x, b * dims.m_t * dims.n)
    post_power = float((xn * xn).sum()) / (b * dims.m_t * dims.n)
    y = channel_forward(xn, h)
    y = awgn_layer_forward(y, sigma, rng)
    dec_in = y.reshape(b, 2 * dims.m_r * dims.n)
    logits, dec_caches = forward_stack(model.decoder, dec_in, train=train)
    cache = ForwardCache(emb_cache=emb_cache, cls_caches=cls_caches, q=q,
                         st_temperature=st_temperature if train else None,
                         enc_caches=enc_caches, norm_cache=norm_cache, h=h,
                         dec_caches=dec_caches, embed_dim=model.config.arch.embed_dim,
                         post_norm_power=post_power)
    return logits, cache


def backward_full(model: AeModel, cache: ForwardCache, dlogits: np.ndarray) -> None:
    """Accumulate parameter gradients for a forward pass."""
    dims = model.dims
    b = dlogits.shape[0]
    d_dec_in = backward_stack(model.decoder, cache.dec_caches, dlogits)
    dy = awgn_layer_backward(d_dec_in.reshape(b, dims.m_r, 2, dims.n))
    dxn = channel_backward(cache.h, dy)
    dx = power_normalize_backward(cache.norm_cache, dxn)
    d_enc_out = dx.reshape(b, -1)
    d_enc_in = backward_stack(model.encoder, cache.enc_caches, d_enc_out)

    d_emb = d_enc_in[:, : cache.embed_dim]
    if model.csi_mode == "discrete":
        d_q = d_enc_in[:, cache.embed_dim :]
        # straight-through: the hard one-hot passes gradients as if it were q
        q = cache.q
        inner = (d_q * q).sum(axis=1, keepdims=True)
        d_qlogits = q * (d_q - inner)
        if cache.st_temperature is not None:
            d_qlogits /= cache.st_temperature
        backward_stack(model.csi_classifier, cache.cls_caches, d_qlogits)
    model.embedding.backward(cache.emb_cache, d_emb)


def transmit_blocks(model: AeModel, s: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Normalized transmit blocks (B, m_t, 2, n) for a message batch (inference mode)."""
    dims = model.dims
    b = len(s)
    emb, _ = model.embedding.forward(np.asarray(s), train=False)
    if model.csi_mode == "none":
        enc_in = emb
    elif model.csi_mode == "perfect":
        enc_in = np.concatenate([emb, csi_features(h)], axis=1)
    else:
        onehot = np.zeros((b, 2**dims.v))
        onehot[np.arange(b), csi_class_index(model, h)] = 1.0
        enc_in = np.concatenate([emb, onehot], axis=1)
    enc_out, _ = forward_stack(model.encoder, enc_in, train=False)
    x = enc_out.reshape(b, dims.m_t, 2, dims.n)
    xn, _ = power_normalize_forward(x, b * dims.m_t * dims.n)
    return xn


def receive_decode(model: AeModel, y: np.ndarray) -> np.ndarray:
    """Decode received blocks (B, m_r, 2, n) to message indices (inference mode)."""
    dec_in = y.reshape(y.shape[0], -1)
    logits, _ = forward_stack(model.decoder, dec_in, train=False)
    return logits.argmax(axis=1)


def infer(model: AeModel, s: np.ndarray, h: np.ndarray, sigma, rng: SeededRng) -> np.ndarray:
    """Full transmit/channel/receive pass; returns decoded message indices."""
    xn = transmit_blocks(model, s, h)
    y = channel_forward(xn, h)
    y = awgn_layer_forward(y, sigma, rng)
    return receive_decode(model, y)


def csi_class_index(model: AeModel, h: np.ndarray) -> np.ndarray:
    """Deterministic v-bit channel class for each realization in the batch."""
    if model.csi_classifier is None:
        raise ValueError("model has no CSI classifier")
    q_logits, _ = forward_stack(model.csi_classifier, csi_features(h), train=False)
    return q_logits.argmax(axis=1)


def feedback_roundtrip(model: AeModel, h: np.ndarray) -> np.ndarray:
    """Deployment-style feedback: classify at the receiver, return the fed-back index.

    The receiver evaluates the classifier on its channel estimate (perfect
    here), conveys the v-bit index error-free, and the transmitter
    reconstitutes the identical one-hot class.  Must equal the in-graph
    index by construction.
    """
    rx_index = csi_class_index(model, h)
    tx_onehot = np.zeros((h.shape[0], 2**model.dims.v))
    tx_onehot[np.arange(h.shape[0]), rx_index] = 1.0
    assert np.array_equal(tx_onehot.argmax(axis=1), rx_index)
    return rx_index


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(model: AeModel, path) -> None:
    meta = {"kind": "mimolab-ae", "config": model.config.to_dict()}
    save_arrays(path, meta, model.named_arrays())


def load_checkpoint(path) -> AeModel:
    meta, arrays = load_arrays(path)
    if meta.get("kind") != "mimolab-ae":
        raise ValueError(f"not an autoencoder checkpoint: {path}")
    cfg = config_from_dict(meta["config"])
    model = build_model(cfg)
    expected = dict(model.named_arrays())
    if set(expected) != set(arrays):
        raise ValueError("checkpoint arrays do not match the model architecture")
    for name, arr in model.named_arrays():
        if arrays[name].shape != arr.shape:
            raise ValueError(f"shape mismatch for {name}")
        arr[...] = arrays[name]
    return model
