"""Convolutional policy network for k x k board observations.

ceil(log2(k)) + 1 blocks of conv3x3 -> batch-norm -> ReLU. The first block
keeps the spatial size (stride 1); each later block halves it (stride 2,
rounding up) while doubling the channel count, ending at 1x1. A linear head
maps the flattened features to the four movement logits. Convolutions carry
no bias: batch-norm's shift makes one redundant.
"""

from __future__ import annotations

import math

import numpy as np

from staghunt.neural import layers


class ConvPolicyNet:
    """Policy network; owns parameters, batch-norm running stats, and the
    forward cache consumed by :meth:`backward`."""

    def __init__(self, in_channels=7, board_size=5, n_actions=4, base_channels=16,
                 rng: np.random.Generator | None = None):
        if board_size < 2:
            raise ValueError("board_size must be at least 2")
        rng = rng or np.random.default_rng()
        self.in_channels = in_channels
        self.board_size = board_size
        self.n_actions = n_actions
        self.base_channels = base_channels
        self.n_blocks = math.ceil(math.log2(board_size)) + 1

        self.params: dict[str, np.ndarray] = {}
        self.running: dict[str, np.ndarray] = {}
        self.strides: list[int] = []
        self._cache = None

        c_in, size = in_channels, board_size
        c_out = base_channels
        for i in range(self.n_blocks):
            stride = 1 if i == 0 else 2
            fan_in = c_in * 9
            bound = 1.0 / math.sqrt(fan_in)
            self.params[f"conv{i}.w"] = rng.uniform(-bound, bound, size=(c_out, c_in, 3, 3))
            self.params[f"bn{i}.gamma"] = np.ones(c_out)
            self.params[f"bn{i}.beta"] = np.zeros(c_out)
            self.running[f"bn{i}.mean"] = np.zeros(c_out)
            self.running[f"bn{i}.var"] = np.ones(c_out)
            self.strides.append(stride)
            size = -(-size // stride)  # ceil division
            c_in = c_out
            if i + 1 < self.n_blocks:
                c_out *= 2
        self.feature_size = c_in * size * size
        bound = 1.0 / math.sqrt(self.feature_size)
        self.params["head.w"] = rng.uniform(-bound, bound, size=(n_actions, self.feature_size))
        self.params["head.b"] = np.zeros(n_actions)

    def spatial_sizes(self) -> list[int]:
        """Board size after each block, starting with the input size."""
        sizes = [self.board_size]
        for stride in self.strides:
            sizes.append(-(-sizes[-1] // stride))
        return sizes

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        """Logits for a batch of observations (N, C, k, k).

        Train mode normalizes with batch statistics, updates the running
        statistics, and records the cache for :meth:`backward`; eval mode
        uses running statistics and keeps no cache.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 4 or x.shape[1] != self.in_channels or x.shape[2:] != (self.board_size,) * 2:
            raise ValueError(
                f"expected (N, {self.in_channels}, {self.board_size}, {self.board_size}), got {x.shape}"
            )
        caches = []
        h = np.ascontiguousarray(x.transpose(0, 2, 3, 1))  # channels-last internally
        for i in range(self.n_blocks):
            h, conv_cache = layers.conv2d_forward(h, self.params[f"conv{i}.w"], self.strides[i])
            h, bn_cache, new_mean, new_var = layers.batchnorm_forward(
                h,
                self.params[f"bn{i}.gamma"],
                self.params[f"bn{i}.beta"],
                self.running[f"bn{i}.mean"],
                self.running[f"bn{i}.var"],
                train,
            )
            if train:
                self.running[f"bn{i}.mean"] = new_mean
                self.running[f"bn{i}.var"] = new_var
            h, relu_cache = layers.relu_forward(h)
            caches.append((conv_cache, bn_cache, relu_cache, h.shape))
        flat = h.reshape(h.shape[0], -1)
        logits, lin_cache = layers.linear_forward(flat, self.params["head.w"], self.params["head.b"])
        self._cache = (caches, lin_cache) if train else None
        return logits

    def backward(self, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Parameter gradients for the last train-mode forward pass."""
        if self._cache is None:
            raise RuntimeError("backward requires a preceding forward(train=True)")
        caches, lin_cache = self._cache
        grads: dict[str, np.ndarray] = {}
        dflat, grads["head.w"], grads["head.b"] = layers.linear_backward(
            dlogits, lin_cache, self.params["head.w"]
        )
        dh = dflat.reshape(caches[-1][3])
        for i in range(self.n_blocks - 1, -1, -1):
            conv_cache, bn_cache, relu_cache, _ = caches[i]
            dh = layers.relu_backward(dh, relu_cache)
            dh, grads[f"bn{i}.gamma"], grads[f"bn{i}.beta"] = layers.batchnorm_backward(dh, bn_cache)
            dh, grads[f"conv{i}.w"] = layers.conv2d_backward(dh, conv_cache)
        for name, grad in grads.items():
            if not np.all(np.isfinite(grad)):
                raise FloatingPointError(f"non-finite gradient in {name}")
        return grads

    def clone_parameters(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}


def save_checkpoint(net: ConvPolicyNet, path) -> None:
    """Write every parameter and running statistic; round-trips bit-exact."""
    arrays = {f"param/{k}": v for k, v in net.params.items()}
    arrays.update({f"running/{k}": v for k, v in net.running.items()})
    np.savez(path, **arrays)


def load_checkpoint(net: ConvPolicyNet, path) -> None:
    """Restore a checkpoint written by :func:`save_checkpoint` in place."""
    with np.load(path) as data:
        names = set(data.files)
        expected = {f"param/{k}" for k in net.params} | {f"running/{k}" for k in net.running}
        if names != expected:
            raise ValueError(f"checkpoint keys {sorted(names)} do not match the network")
        for key in net.params:
            stored = data[f"param/{key}"]
            if stored.shape != net.params[key].shape:
                raise ValueError(f"shape mismatch for {key}")
            net.params[key] = stored
        for key in net.running:
            net.running[key] = data[f"running/{key}"]
