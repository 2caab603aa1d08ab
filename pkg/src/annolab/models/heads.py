"""Classification heads over pluggable feature vectors, in plain numpy.

Every head is a one-hidden-layer MLP (ReLU, no dropout) on top of an
externally produced feature vector:

  bin    — single sigmoid logit, presence/absence.
  multi  — 5 softmax logits over the full label scale.
  coral  — one shared score g(x) plus 4 ordered-output thresholds; the
           cumulative logit for "label > k-1" is g(x) + b_k and the decoded
           label counts how many cumulative probabilities exceed 0.5.
  bin_coral / bin_multi — two independent heads reading the same features,
           trained on a weighted sum of the two losses.

Losses use the stable softplus form, so arbitrarily large logits neither
overflow nor produce NaN. Gradients are hand-derived and verified against
central finite differences (see train.grad_check).
"""

from __future__ import annotations

import numpy as np

from ..labels import NUM_CLASSES

MODEL_KINDS = ("bin", "multi", "coral", "bin_multi", "bin_coral")
N_THRESHOLDS = NUM_CLASSES - 1

# parameter names carrying weight decay (weights only: never biases or
# the coral thresholds)
DECAYED_SUFFIXES = ("W1", "w2", "W2")


def _softplus(z):
    return np.logaddexp(0.0, z)


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(kind: str, d: int, hidden: int, seed: int) -> dict[str, np.ndarray]:
    """He-style initialization; biases and thresholds start at zero."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    rng = np.random.default_rng(seed)

    def hidden_block(prefix):
        return {
            f"{prefix}.W1": rng.normal(0.0, np.sqrt(2.0 / d), size=(hidden, d)),
            f"{prefix}.b1": np.zeros(hidden),
        }

    params: dict[str, np.ndarray] = {}
    heads = {"bin": ["bin"], "multi": ["multi"], "coral": ["coral"],
             "bin_multi": ["bin", "multi"], "bin_coral": ["bin", "coral"]}[kind]
    for head in heads:
        params.update(hidden_block(head))
        rng2 = rng  # same stream; head order is fixed by the lists above
        if head == "bin":
            params["bin.w2"] = rng2.normal(0.0, np.sqrt(1.0 / hidden), size=hidden)
            params["bin.b2"] = np.zeros(1)
        elif head == "multi":
            params["multi.W2"] = rng2.normal(
                0.0, np.sqrt(1.0 / hidden), size=(NUM_CLASSES, hidden)
            )
            params["multi.b2"] = np.zeros(NUM_CLASSES)
        elif head == "coral":
            params["coral.w2"] = rng2.normal(0.0, np.sqrt(1.0 / hidden), size=hidden)
            params["coral.c"] = np.zeros(1)
            params["coral.b"] = np.zeros(N_THRESHOLDS)
    return params


def _hidden_forward(params, prefix, X):
    pre = X @ params[f"{prefix}.W1"].T + params[f"{prefix}.b1"]
    return np.maximum(pre, 0.0)


def _hidden_backward(params, prefix, X, H, dH, grads):
    mask = H > 0
    dpre = dH * mask
    grads[f"{prefix}.W1"] = dpre.T @ X
    grads[f"{prefix}.b1"] = dpre.sum(axis=0)


# -- single-sample surfaces -----------------------------------------------

def binary_logit(x: np.ndarray, params: dict) -> float:
    h = _hidden_forward(params, "bin", np.atleast_2d(x))
    return float((h @ params["bin.w2"])[0] + params["bin.b2"][0])


def binary_loss(logit: float, y: int) -> float:
    """Stable binary cross-entropy with sigmoid."""
    return float(_softplus(logit) - y * logit)


def binary_decode(logit: float) -> int:
    """Threshold at probability 0.5; the tie at logit 0 goes to class 0."""
    return int(sigmoid(logit) > 0.5)


def coral_forward(x: np.ndarray, params: dict) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative logits z_k = g(x) + b_k and their sigmoid probabilities."""
    h = _hidden_forward(params, "coral", np.atleast_2d(x))
    g = float((h @ params["coral.w2"])[0] + params["coral.c"][0])
    z = g + params["coral.b"]
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("non-finite coral activation")
    return z, sigmoid(z)


def coral_loss(logits: np.ndarray, y: int) -> float:
    """Sum over thresholds of binary cross-entropy against t_k = 1[y >= k]."""
    logits = np.asarray(logits, dtype=float)
    t = (y >= np.arange(1, N_THRESHOLDS + 1)).astype(float)
    return float(np.sum(_softplus(logits) - t * logits))


def coral_decode(probabilities: np.ndarray) -> int:
    """Label = number of cumulative probabilities above 0.5."""
    return int(np.sum(np.asarray(probabilities) > 0.5))


def dual_loss(
    x: np.ndarray,
    y: int,
    params: dict,
    lambda_bin: float = 1.0,
    lambda_coral: float = 1.0,
) -> float:
    y_bin = 0 if y == 0 else 1
    return lambda_bin * binary_loss(binary_logit(x, params), y_bin) + lambda_coral * (
        coral_loss(coral_forward(x, params)[0], y)
    )


# -- batched loss + gradient ----------------------------------------------

def loss_and_grad(
    kind: str,
    params: dict[str, np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
    lambda_bin: float = 1.0,
    lambda_head2: float = 1.0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean per-sample loss over the batch and its gradient.

    y holds ordinal labels 0..4; binary targets are derived from them, so a
    0/1-labeled binary dataset works unchanged.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y)
    n = X.shape[0]
    y_bin = (y > 0).astype(float)
    grads: dict[str, np.ndarray] = {}
    total = 0.0

    def bin_part(scale):
        nonlocal total
        H = _hidden_forward(params, "bin", X)
        z = H @ params["bin.w2"] + params["bin.b2"][0]
        total_part = np.sum(_softplus(z) - y_bin * z) / n
        dz = scale * (sigmoid(z) - y_bin) / n
        grads["bin.w2"] = H.T @ dz
        grads["bin.b2"] = np.array([dz.sum()])
        dH = np.outer(dz, params["bin.w2"])
        _hidden_backward(params, "bin", X, H, dH, grads)
        total += scale * total_part

    def coral_part(scale):
        nonlocal total
        H = _hidden_forward(params, "coral", X)
        g = H @ params["coral.w2"] + params["coral.c"][0]
        Z = g[:, None] + params["coral.b"][None, :]
        T = (y[:, None] >= np.arange(1, N_THRESHOLDS + 1)[None, :]).astype(float)
        total_part = np.sum(_softplus(Z) - T * Z) / n
        dZ = scale * (sigmoid(Z) - T) / n
        grads["coral.b"] = dZ.sum(axis=0)
        dg = dZ.sum(axis=1)
        grads["coral.c"] = np.array([dg.sum()])
        grads["coral.w2"] = H.T @ dg
        dH = np.outer(dg, params["coral.w2"])
        _hidden_backward(params, "coral", X, H, dH, grads)
        total += scale * total_part

    def multi_part(scale):
        nonlocal total
        H = _hidden_forward(params, "multi", X)
        logits = H @ params["multi.W2"].T + params["multi.b2"]
        shifted = logits - logits.max(axis=1, keepdims=True)
        logZ = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
        total_part = np.sum(logZ - logits[np.arange(n), y]) / n
        probs = np.exp(logits - logZ[:, None])
        dlogits = probs.copy()
        dlogits[np.arange(n), y] -= 1.0
        dlogits *= scale / n
        grads["multi.W2"] = dlogits.T @ H
        grads["multi.b2"] = dlogits.sum(axis=0)
        dH = dlogits @ params["multi.W2"]
        _hidden_backward(params, "multi", X, H, dH, grads)
        total += scale * total_part

    if kind == "bin":
        bin_part(1.0)
    elif kind == "coral":
        coral_part(1.0)
    elif kind == "multi":
        multi_part(1.0)
    elif kind == "bin_coral":
        bin_part(lambda_bin)
        coral_part(lambda_head2)
    elif kind == "bin_multi":
        bin_part(lambda_bin)
        multi_part(lambda_head2)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    if not np.isfinite(total):
        raise FloatingPointError("non-finite loss")
    return float(total), grads


def predict(kind: str, params: dict, X: np.ndarray) -> dict[str, np.ndarray]:
    """Decoded predictions per head: keys among 'binary' and 'ordinal'."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out: dict[str, np.ndarray] = {}
    if kind in ("bin", "bin_multi", "bin_coral"):
        H = _hidden_forward(params, "bin", X)
        z = H @ params["bin.w2"] + params["bin.b2"][0]
        out["binary"] = (sigmoid(z) > 0.5).astype(int)
        out["p_positive"] = sigmoid(z)
    if kind in ("coral", "bin_coral"):
        H = _hidden_forward(params, "coral", X)
        g = H @ params["coral.w2"] + params["coral.c"][0]
        Z = g[:, None] + params["coral.b"][None, :]
        out["ordinal"] = (sigmoid(Z) > 0.5).sum(axis=1)
    if kind in ("multi", "bin_multi"):
        H = _hidden_forward(params, "multi", X)
        logits = H @ params["multi.W2"].T + params["multi.b2"]
        out["ordinal"] = logits.argmax(axis=1)
    return out
