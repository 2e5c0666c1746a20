"""Forward/backward primitives for the grid policy network.

All layers are plain functions returning (output, cache); the matching
backward consumes the upstream gradient and the cache. Activations flow in
channels-last layout (N, H, W, C), which keeps every im2col gather and
scatter contiguous in the channel axis; convolution weights keep the
(O, C, 3, 3) layout used by checkpoints. Everything runs in double
precision so finite-difference checks hold to 1e-6 relative error.
Convolutions are fixed at kernel 3 with padding 1, the only shape the
policy network uses.
"""

from __future__ import annotations

import functools as _functools

import numpy as np

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


@_functools.lru_cache(maxsize=64)
def _dense_index_maps(h, wd, c, o, stride):
    """Index maps embedding a 3x3 kernel into a whole-board dense matrix.

    Boards here are tiny (<= 7x7 padded), so convolution is cheapest as one
    (N, board*C) @ (board*C, positions*O) matrix product. The maps place
    every kernel element w[o,c,i,j] at its (padded cell, output cell) slots.
    """
    oh = -(-h // stride)
    ow = -(-wd // stride)
    p_rows = (h + 2) * (wd + 2) * c
    q_cols = oh * ow * o
    dst = []
    src = []
    for p in range(oh):
        for q in range(ow):
            col_base = (p * ow + q) * o
            for i in range(3):
                for j in range(3):
                    row_base = ((p * stride + i) * (wd + 2) + (q * stride + j)) * c
                    for ch in range(c):
                        row = row_base + ch
                        for oc in range(o):
                            dst.append(row * q_cols + col_base + oc)
                            src.append(((oc * c + ch) * 3 + i) * 3 + j)
    return (np.asarray(dst), np.asarray(src), p_rows, q_cols, oh, ow)


_DENSE_CACHE: dict = {}
_DENSE_CACHE_LIMIT = 256


def _dense_weight(w, stride, h, wd):
    """Dense matrix for ``w``, reusing the last build while ``w`` is unchanged.

    Rollouts run many forwards between parameter updates, so the embed is
    cached and revalidated by exact content comparison; stale ids or
    in-place edits (e.g. finite-difference probes) can never serve a wrong
    matrix, only force a rebuild.
    """
    o, c = w.shape[:2]
    key = (id(w), stride, h, wd, w.dtype)
    entry = _DENSE_CACHE.get(key)
    if entry is not None and np.array_equal(entry[0], w):
        return entry[1]
    dst, src, p_rows, q_cols, _, _ = _dense_index_maps(h, wd, c, o, stride)
    dense = np.zeros(p_rows * q_cols, dtype=w.dtype)
    dense[dst] = w.reshape(-1)[src]
    dense = dense.reshape(p_rows, q_cols)
    if len(_DENSE_CACHE) >= _DENSE_CACHE_LIMIT:
        _DENSE_CACHE.clear()
    _DENSE_CACHE[key] = (w.copy(), dense)
    return dense


def conv2d_forward(x, w, stride=1):
    """3x3 convolution, padding 1, no bias. x: (N,H,W,C), w: (O,C,3,3)."""
    n, h, wd, c = x.shape
    o = w.shape[0]
    _, _, _, _, oh, ow = _dense_index_maps(h, wd, c, o, stride)
    xp = np.zeros((n, h + 2, wd + 2, c), dtype=x.dtype)
    xp[:, 1:h + 1, 1:wd + 1, :] = x
    xf = xp.reshape(n, -1)
    dense = _dense_weight(w.astype(x.dtype, copy=False), stride, h, wd)
    out = (xf @ dense).reshape(n, oh, ow, o)
    cache = (xf, dense, (n, h, wd, c), w.shape, stride, oh, ow)
    return out, cache


def conv2d_backward(dout, cache):
    xf, dense, (n, h, wd, c), w_shape, stride, oh, ow = cache
    o = w_shape[0]
    dout2 = dout.reshape(n * oh * ow, o).reshape(n, oh * ow * o)
    dxf = dout2 @ dense.T
    dxp = dxf.reshape(n, h + 2, wd + 2, c)
    dense_grad = xf.T @ dout2
    dst, src, _, _, _, _ = _dense_index_maps(h, wd, c, o, stride)
    dw = np.bincount(src, weights=dense_grad.reshape(-1)[dst], minlength=o * c * 9)
    return dxp[:, 1:h + 1, 1:wd + 1, :], dw.reshape(w_shape).astype(dout.dtype, copy=False)


def batchnorm_forward(x, gamma, beta, running_mean, running_var, train):
    """Per-channel normalization over (N,H,W) with affine scale/shift.

    x is channels-last (N,H,W,C). Train mode normalizes by batch statistics
    and returns updated running statistics; eval mode uses the running
    statistics unchanged.
    """
    if train:
        mu = x.mean(axis=(0, 1, 2))
        var = x.var(axis=(0, 1, 2))
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mu) * inv_std
        new_mean = (1.0 - BN_MOMENTUM) * running_mean + BN_MOMENTUM * mu
        new_var = (1.0 - BN_MOMENTUM) * running_var + BN_MOMENTUM * var
    else:
        inv_std = 1.0 / np.sqrt(running_var + BN_EPS)
        xhat = (x - running_mean) * inv_std
        new_mean, new_var = running_mean, running_var
    out = gamma * xhat + beta
    cache = (xhat, gamma, inv_std, train)
    return out, cache, new_mean, new_var


def batchnorm_backward(dout, cache):
    xhat, gamma, inv_std, train = cache
    axes = (0, 1, 2)
    dgamma = (dout * xhat).sum(axis=axes)
    dbeta = dout.sum(axis=axes)
    dxhat = dout * gamma
    if not train:
        return dxhat * inv_std, dgamma, dbeta
    m = dout.shape[0] * dout.shape[1] * dout.shape[2]
    s1 = dxhat.sum(axis=axes)
    s2 = (dxhat * xhat).sum(axis=axes)
    dx = (inv_std / m) * (m * dxhat - s1 - xhat * s2)
    return dx, dgamma, dbeta


def relu_forward(x):
    return np.maximum(x, 0.0), x


def relu_backward(dout, cache):
    # Subgradient 0 at exactly 0.
    return dout * (cache > 0.0)


def linear_forward(x, w, b):
    return x @ w.T + b, x


def linear_backward(dout, cache, w):
    x = cache
    return dout @ w, dout.T @ x, dout.sum(axis=0)


def softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
