"""
Numpy building blocks with hand-written backward passes.

Everything keeps the dtype of its parameters, so a model cast to float64
runs the same code for gradient checking.
"""
from dataclasses import dataclass

import numpy as np

LEAK = 0.1


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def leaky_relu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, LEAK * x)


def leaky_relu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, LEAK).astype(x.dtype)


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Log-softmax that tolerates -inf entries (they get probability 0)."""
    top = np.max(x, axis=axis, keepdims=True)
    shifted = x - top
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def dropout_mask(rng: np.random.Generator | None, shape, rate: float, dtype) -> np.ndarray | None:
    """Inverted-dropout mask, or None when dropout is off."""
    if rng is None or rate <= 0:
        return None
    keep = rng.random(shape) >= rate
    return (keep / (1.0 - rate)).astype(dtype)


@dataclass
class LSTMCache:
    x: np.ndarray
    order: list[int]
    z: np.ndarray      # [x_t; h_{t-1}] per step
    gates: np.ndarray  # i, f, g, o after nonlinearity
    c_prev: np.ndarray
    c: np.ndarray
    W: np.ndarray


def lstm_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray, reverse: bool = False):
    """
    Run one LSTM direction over a (T, in) sequence.

    W is (4H, in + H) with gate blocks in the order input, forget, cell,
    output; b is (4H,). Returns the (T, H) hidden states and a cache for
    lstm_backward.
    """
    steps, n_in = x.shape
    hidden = W.shape[0] // 4
    dtype = W.dtype
    order = list(range(steps - 1, -1, -1)) if reverse else list(range(steps))

    h = np.zeros((steps, hidden), dtype=dtype)
    c = np.zeros((steps, hidden), dtype=dtype)
    c_prev_all = np.zeros((steps, hidden), dtype=dtype)
    z_all = np.zeros((steps, n_in + hidden), dtype=dtype)
    gates = np.zeros((steps, 4 * hidden), dtype=dtype)

    h_prev = np.zeros(hidden, dtype=dtype)
    c_prev = np.zeros(hidden, dtype=dtype)
    for t in order:
        z = np.concatenate([x[t], h_prev])
        a = W @ z + b
        i = sigmoid(a[:hidden])
        f = sigmoid(a[hidden:2 * hidden])
        g = np.tanh(a[2 * hidden:3 * hidden])
        o = sigmoid(a[3 * hidden:])
        c_t = f * c_prev + i * g
        h_t = o * np.tanh(c_t)

        z_all[t] = z
        gates[t] = np.concatenate([i, f, g, o])
        c_prev_all[t] = c_prev
        c[t] = c_t
        h[t] = h_t
        h_prev, c_prev = h_t, c_t

    return h, LSTMCache(x, order, z_all, gates, c_prev_all, c, W)


def lstm_backward(dh: np.ndarray, cache: LSTMCache):
    """Backpropagate (T, H) output gradients; returns (dx, dW, db)."""
    W = cache.W
    hidden = W.shape[0] // 4
    n_in = cache.x.shape[1]
    dtype = W.dtype

    dW = np.zeros_like(W)
    db = np.zeros(4 * hidden, dtype=dtype)
    dx = np.zeros_like(cache.x)
    dh_next = np.zeros(hidden, dtype=dtype)
    dc_next = np.zeros(hidden, dtype=dtype)

    for t in reversed(cache.order):
        i, f, g, o = np.split(cache.gates[t], 4)
        tanh_c = np.tanh(cache.c[t])
        dh_t = dh[t] + dh_next

        do = dh_t * tanh_c
        dc = dc_next + dh_t * o * (1.0 - tanh_c ** 2)
        di = dc * g
        df = dc * cache.c_prev[t]
        dg = dc * i
        dc_next = dc * f

        da = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g ** 2),
            do * o * (1.0 - o),
        ])
        dW += np.outer(da, cache.z[t])
        db += da
        dz = W.T @ da
        dx[t] = dz[:n_in]
        dh_next = dz[n_in:]

    return dx, dW, db
