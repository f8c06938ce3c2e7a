"""Minimal numpy layer library with hand-written backward passes.

Activations are channels-last (B, H, W, C): im2col windows then copy
contiguous channel runs and conv GEMM outputs need no transpose, which
is what keeps CPU training viable. Layers cache forward activations on
themselves (single-threaded use per model instance) and accumulate
parameter gradients into ``Param.grad``. All math runs in the dtype of
the parameters (float32 by default, float64 for finite-difference
verification).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Param:
    """A trainable array plus its gradient accumulator."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = value
        self.grad = np.zeros_like(value)


class Layer:
    """Base: layers expose named parameters and a forward/backward pair."""

    def named_params(self):
        for name, attr in vars(self).items():
            if isinstance(attr, Param):
                yield name, attr

    def zero_grad(self):
        for _, p in self.named_params():
            p.grad[...] = 0.0


def silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


def silu_fwd(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SiLU plus the sigmoid factor, kept for the backward pass."""
    s = 1.0 / (1.0 + np.exp(-x))
    return x * s, s


def silu_backward(dout: np.ndarray, x: np.ndarray, s: np.ndarray | None = None) -> np.ndarray:
    if s is None:
        s = 1.0 / (1.0 + np.exp(-x))
    return dout * (s * (1.0 + x * (1.0 - s)))


class Conv2d(Layer):
    """k x k convolution; stride 1 or 2, 'same'-style padding.

    Weight layout is (k*k*cin, cout), i.e. window-major with the channel
    innermost, so an im2col buffer multiplies it directly and the
    (k, k, cin, cout) view yields per-offset slices. The forward pass uses
    im2col while the buffer is cache-sized and per-offset shift GEMMs
    beyond that; the backward pass is always shift-based, so only the
    padded input is cached.
    """

    IM2COL_MAX_BYTES = 16 << 20

    def __init__(self, cin, cout, ksize=3, stride=1, pad=None, *, rng, dtype=np.float32,
                 zero_init=False):
        self.cin, self.cout, self.k, self.stride = cin, cout, ksize, stride
        self.pad = (ksize // 2) if pad is None else pad
        fan_in = cin * ksize * ksize
        if zero_init:
            w = np.zeros((fan_in, cout), dtype=dtype)
        else:
            w = (rng.standard_normal((fan_in, cout)) * np.sqrt(2.0 / fan_in)).astype(dtype)
        self.weight = Param(w)
        self.bias = Param(np.zeros(cout, dtype=dtype))
        self._cache = None

    def _w_offsets(self, arr: np.ndarray) -> np.ndarray:
        return arr.reshape(self.k, self.k, self.cin, self.cout)

    def forward(self, x: np.ndarray, remember: bool = True) -> np.ndarray:
        B, H, W, C = x.shape
        k, s, p = self.k, self.stride, self.pad
        if k == 1 and s == 1:
            out = x.reshape(B * H * W, C) @ self.weight.value + self.bias.value
            if remember:
                self._cache = (x, (B, H, W, C))
            return out.reshape(B, H, W, self.cout)
        if p:
            xp = np.zeros((B, H + 2 * p, W + 2 * p, C), dtype=x.dtype)
            xp[:, p : p + H, p : p + W, :] = x
        else:
            xp = x
        Ho = (H + 2 * p - k) // s + 1
        Wo = (W + 2 * p - k) // s + 1
        cols_bytes = B * Ho * Wo * k * k * C * x.dtype.itemsize
        if s == 1 and cols_bytes > self.IM2COL_MAX_BYTES:
            wk = self._w_offsets(self.weight.value)
            xf = xp.reshape(-1, C)
            out = np.zeros((B, Ho, Wo, self.cout), dtype=x.dtype)
            for ki in range(k):
                for kj in range(k):
                    y = (xf @ wk[ki, kj]).reshape(B, H + 2 * p, W + 2 * p, self.cout)
                    out += y[:, ki : ki + Ho, kj : kj + Wo, :]
            out += self.bias.value
        else:
            win = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::s, ::s]
            # (B, Ho, Wo, C, k, k) -> (B, Ho, Wo, k, k, C): C stays innermost
            cols = np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3)).reshape(
                B * Ho * Wo, k * k * C
            )
            out = (cols @ self.weight.value + self.bias.value).reshape(B, Ho, Wo, self.cout)
        if remember:
            self._cache = (xp, (B, H, W, C))
        return out

    def backward(self, dout: np.ndarray) -> np.ndarray:
        xp, (B, H, W, C) = self._cache
        self._cache = None
        k, s, p = self.k, self.stride, self.pad
        dflat = dout.reshape(-1, self.cout)
        if k == 1 and s == 1:
            self.weight.grad += xp.reshape(-1, C).T @ dflat
            self.bias.grad += dflat.sum(axis=0)
            return (dflat @ self.weight.value.T).reshape(B, H, W, C)
        Ho, Wo = dout.shape[1], dout.shape[2]
        self.bias.grad += dflat.sum(axis=0)
        dwk = self._w_offsets(self.weight.grad)
        wk = self._w_offsets(self.weight.value)
        dxp = np.zeros_like(xp)
        hi = s * (Ho - 1) + 1
        wi = s * (Wo - 1) + 1
        for ki in range(k):
            for kj in range(k):
                xs = np.ascontiguousarray(xp[:, ki : ki + hi : s, kj : kj + wi : s, :])
                dwk[ki, kj] += xs.reshape(-1, C).T @ dflat
                dxp[:, ki : ki + hi : s, kj : kj + wi : s, :] += (
                    dflat @ wk[ki, kj].T
                ).reshape(B, Ho, Wo, C)
        return dxp[:, p : p + H, p : p + W, :] if p else dxp


class Linear(Layer):
    def __init__(self, cin, cout, *, rng, dtype=np.float32, zero_init=False):
        if zero_init:
            w = np.zeros((cin, cout), dtype=dtype)
        else:
            w = (rng.standard_normal((cin, cout)) * np.sqrt(2.0 / cin)).astype(dtype)
        self.weight = Param(w)
        self.bias = Param(np.zeros(cout, dtype=dtype))
        self._cache = None

    def forward(self, x: np.ndarray, remember: bool = True) -> np.ndarray:
        if remember:
            self._cache = x
        return x @ self.weight.value + self.bias.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x = self._cache
        self._cache = None
        self.weight.grad += x.T @ dout
        self.bias.grad += dout.sum(axis=0)
        return dout @ self.weight.value.T


class GroupNorm(Layer):
    """Per-(sample, group) normalization with affine scale/shift."""

    def __init__(self, groups, channels, *, dtype=np.float32, eps=1e-5):
        assert channels % groups == 0, "channels must divide into groups"
        self.groups, self.channels, self.eps = groups, channels, eps
        self.gamma = Param(np.ones(channels, dtype=dtype))
        self.beta = Param(np.zeros(channels, dtype=dtype))
        self._cache = None

    def forward(self, x: np.ndarray, remember: bool = True) -> np.ndarray:
        B, H, W, C = x.shape
        g = self.groups
        xg = x.reshape(B, H * W, g, C // g)
        mu = xg.mean(axis=(1, 3), keepdims=True)
        var = xg.var(axis=(1, 3), keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = ((xg - mu) * inv).reshape(B, H, W, C)
        if remember:
            self._cache = (xhat, inv, (B, H, W, C))
        return xhat * self.gamma.value + self.beta.value

    def backward(self, dout: np.ndarray) -> np.ndarray:
        xhat, inv, (B, H, W, C) = self._cache
        self._cache = None
        g = self.groups
        self.gamma.grad += (dout * xhat).sum(axis=(0, 1, 2))
        self.beta.grad += dout.sum(axis=(0, 1, 2))
        dxhat = (dout * self.gamma.value).reshape(B, H * W, g, C // g)
        xhat_g = xhat.reshape(B, H * W, g, C // g)
        term = (
            dxhat
            - dxhat.mean(axis=(1, 3), keepdims=True)
            - xhat_g * (dxhat * xhat_g).mean(axis=(1, 3), keepdims=True)
        )
        return (inv * term).reshape(B, H, W, C)


class Upsample2x:
    """Nearest-neighbor 2x upsampling; backward sums each 2x2 block."""

    def forward(self, x: np.ndarray) -> np.ndarray:
        return x.repeat(2, axis=1).repeat(2, axis=2)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        B, H2, W2, C = dout.shape
        return dout.reshape(B, H2 // 2, 2, W2 // 2, 2, C).sum(axis=(2, 4))


def time_embedding(t, dim: int, dtype=np.float32) -> np.ndarray:
    """Sinusoidal embedding of integer timesteps; shape (B, dim)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / max(half - 1, 1))
    args = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(args), np.cos(args)], axis=1).astype(dtype)
