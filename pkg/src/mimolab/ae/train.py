"""Single-threaded deterministic training loop for the learned systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import SeededRng, draw_rayleigh_batch
from ..errors import NumericError
from ..nn import Adam, get_loss
from .models import AeModel, backward_full, forward_full

_TRAIN_STREAM = 2

# annealed-softmax schedule for the discrete-CSI alternative to straight-through
ANNEAL_T_START = 5.0
ANNEAL_T_END = 0.1


@dataclass
class TrainResult:
    model: AeModel
    loss_trace: np.ndarray        # raw per-step loss, unsmoothed
    power_error_trace: np.ndarray  # |batch power - 1| after the norm layer, per step
    eta_trace: np.ndarray


def _eta_at(step: int, steps: int, eta0: float, decay_at, factor: float) -> float:
    eta = eta0
    for frac in decay_at:
        if step >= int(frac * steps):
            eta *= factor
    return eta


def _sigmas(cfg, rng: SeededRng, batch: int):
    snr = cfg.train_snr_db
    if isinstance(snr, tuple):
        lo, hi = snr
        draw = lo + rng.uniform(batch) * (hi - lo)
        return 10.0 ** (-draw / 20.0)
    return 10.0 ** (-snr / 20.0)


def train(model: AeModel, rng: SeededRng | None = None,
          progress: bool = False) -> TrainResult:
    """Train in place per the model's TrainConfig; returns the model plus traces.

    Per step the loop samples a uniform message batch, draws one fresh
    channel per element and a per-example noise level, runs the full
    differentiable chain, and applies one Adam update.  All draws come
    from a single stream in a fixed order, so a (seed, config) pair fixes
    the final parameters bit for bit.
    """
    cfg = model.config.train
    dims = model.dims
    if rng is None:
        rng = SeededRng(cfg.seed, _TRAIN_STREAM)
    opt = Adam(model.parameters(), eta=cfg.eta)
    loss_fn = get_loss(cfg.loss)
    annealed = getattr(cfg, "discrete_forward", "hard") == "annealed"

    losses = np.empty(cfg.steps)
    power_err = np.empty(cfg.steps)
    etas = np.empty(cfg.steps)
    for step in range(cfg.steps):
        opt.eta = _eta_at(step, cfg.steps, cfg.eta, cfg.lr_decay_at, cfg.lr_decay_factor)
        s = rng.integers(dims.num_messages, cfg.batch_size)
        h = draw_rayleigh_batch(cfg.batch_size, dims.m_r, dims.m_t, rng)
        sigma = _sigmas(cfg, rng, cfg.batch_size)
        temperature = None
        if annealed and model.csi_mode == "discrete":
            frac = step / max(cfg.steps - 1, 1)
            temperature = ANNEAL_T_START * (ANNEAL_T_END / ANNEAL_T_START) ** frac
        logits, cache = forward_full(model, s, h, sigma, rng, train=True,
                                     st_temperature=temperature)
        loss, dlogits = loss_fn(logits, s)
        if not np.isfinite(loss):
            raise NumericError(
                f"non-finite loss at step {step} "
                f"(config {model.config.name!r}, seed {cfg.seed})"
            )
        opt.zero_grad()
        backward_full(model, cache, dlogits)
        opt.step()
        losses[step] = loss
        power_err[step] = abs(cache.post_norm_power - 1.0)
        etas[step] = opt.eta
        if progress and (step + 1) % max(cfg.steps // 20, 1) == 0:
            recent = losses[max(0, step - 999) : step + 1].mean()
            print(f"  step {step + 1}/{cfg.steps}  loss(1k) {recent:.4f}", flush=True)
    return TrainResult(model=model, loss_trace=losses,
                       power_error_trace=power_err, eta_trace=etas)
