"""Softmax classification losses and their analytic logit gradients.

Two variants are provided.  ``binary_over_onehot`` treats the softmax
output against a one-hot target as 2**k independent binary terms,

    L = -(1/C) * sum_i [ y_i log p_i + (1 - y_i) log(1 - p_i) ],

averaged over the batch.  ``softmax_ce`` is the plain categorical
shortcut -log p_true.  Probabilities are clamped to [1e-12, 1 - 1e-12]
inside the logs.  Both losses share the argmax decision rule.
"""

from __future__ import annotations

import numpy as np

P_CLAMP = 1e-12
LOSS_KINDS = ("binary_over_onehot", "softmax_ce")


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.ndim != 1 or logits.shape[0] != labels.size:
        raise ValueError("logits must be (B, C) with one label per row")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= logits.shape[1]:
        raise ValueError("label out of range")
    return labels


def binary_over_onehot(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Per-class binary cross-entropy on softmax outputs; returns (loss, dlogits)."""
    labels = _check(logits, labels)
    b, c = logits.shape
    p = softmax(logits)
    pc = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
    y = np.zeros_like(p)
    y[np.arange(b), labels] = 1.0
    loss = -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)).sum() / (b * c)
    # dL/dp then through the softmax jacobian p * (I - p^T)
    dldp = -(y / pc - (1.0 - y) / (1.0 - pc)) / (b * c)
    inner = (dldp * p).sum(axis=1, keepdims=True)
    dlogits = p * (dldp - inner)
    return float(loss), dlogits


def softmax_ce(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Plain categorical cross-entropy -log p_true; returns (loss, dlogits)."""
    labels = _check(logits, labels)
    b = logits.shape[0]
    p = softmax(logits)
    pc = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
    loss = -np.log(pc[np.arange(b), labels]).sum() / b
    dlogits = p.copy()
    dlogits[np.arange(b), labels] -= 1.0
    return float(loss), dlogits / b


def get_loss(kind: str):
    if kind == "binary_over_onehot":
        return binary_over_onehot
    if kind == "softmax_ce":
        return softmax_ce
    raise ValueError(f"unknown loss kind: {kind!r}")


def random_guess_loss(kind: str, num_classes: int) -> float:
    """Loss value of a uniform classifier; the sanity anchor for fresh models."""
    c = num_classes
    if kind == "softmax_ce":
        return float(np.log(c))
    if kind == "binary_over_onehot":
        return float((np.log(c) - (c - 1) * np.log(1.0 - 1.0 / c)) / c)
    raise ValueError(f"unknown loss kind: {kind!r}")
