"""Base U-shaped noise predictor and the trainable control encoder.

The base network consumes (x_t, t); the control encoder consumes the
7-channel conditioning stack and produces one residual per resolution
level, passed through zero-initialized 1x1 projections and added to the
base feature maps right after each level's residual block. With fresh
projections the conditioned model equals the base bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatchError
from .layers import (
    Conv2d,
    GroupNorm,
    Linear,
    Param,
    Upsample2x,
    silu,
    silu_backward,
    silu_fwd,
    time_embedding,
)


@dataclass(frozen=True)
class ModelConfig:
    image_size: int = 32
    base_channels: int = 32
    channel_multipliers: tuple[int, ...] = (1, 2, 2)
    time_embed_dim: int = 128
    cond_channels: int = 7
    groups: int = 8

    def __post_init__(self):
        object.__setattr__(self, "channel_multipliers", tuple(self.channel_multipliers))
        factor = self.downsample_factor
        if self.image_size % factor != 0:
            raise ValueError(
                f"image_size {self.image_size} not divisible by {factor}"
            )
        for m in self.channel_multipliers:
            if (self.base_channels * m) % self.groups != 0:
                raise ValueError("level channels must be divisible by groups")

    @property
    def levels(self) -> int:
        return len(self.channel_multipliers)

    @property
    def downsample_factor(self) -> int:
        return 2 ** (self.levels - 1)

    @property
    def channels(self) -> tuple[int, ...]:
        return tuple(self.base_channels * m for m in self.channel_multipliers)

    def to_dict(self) -> dict:
        return {
            "image_size": self.image_size,
            "base_channels": self.base_channels,
            "channel_multipliers": list(self.channel_multipliers),
            "time_embed_dim": self.time_embed_dim,
            "cond_channels": self.cond_channels,
            "groups": self.groups,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            image_size=d["image_size"],
            base_channels=d["base_channels"],
            channel_multipliers=tuple(d["channel_multipliers"]),
            time_embed_dim=d["time_embed_dim"],
            cond_channels=d["cond_channels"],
            groups=d["groups"],
        )


class ResBlock:
    """Pre-activation residual block with a per-block time projection."""

    def __init__(self, cin, cout, temb_dim, groups, *, rng, dtype):
        self.gn1 = GroupNorm(groups, cin, dtype=dtype)
        self.conv1 = Conv2d(cin, cout, 3, rng=rng, dtype=dtype)
        self.temb_proj = Linear(temb_dim, cout, rng=rng, dtype=dtype)
        self.gn2 = GroupNorm(groups, cout, dtype=dtype)
        self.conv2 = Conv2d(cout, cout, 3, rng=rng, dtype=dtype)
        self.skip = None if cin == cout else Conv2d(cin, cout, 1, rng=rng, dtype=dtype)
        self._cache = None

    def children(self):
        out = {"gn1": self.gn1, "conv1": self.conv1, "temb_proj": self.temb_proj,
               "gn2": self.gn2, "conv2": self.conv2}
        if self.skip is not None:
            out["skip"] = self.skip
        return out

    def forward(self, x, temb, remember=True):
        h1 = self.gn1.forward(x, remember)
        if remember:
            a1, s1 = silu_fwd(h1)
        else:
            a1 = silu(h1)
        h = self.conv1.forward(a1, remember)
        h = h + self.temb_proj.forward(temb, remember)[:, None, None, :]
        h2 = self.gn2.forward(h, remember)
        if remember:
            a2, s2 = silu_fwd(h2)
            self._cache = (h1, s1, h2, s2)
        else:
            a2 = silu(h2)
        out = self.conv2.forward(a2, remember)
        sk = x if self.skip is None else self.skip.forward(x, remember)
        return sk + out

    def backward(self, dout):
        h1, s1, h2, s2 = self._cache
        self._cache = None
        ds2 = self.conv2.backward(dout)
        dh = self.gn2.backward(silu_backward(ds2, h2, s2))
        dtemb = self.temb_proj.backward(dh.sum(axis=(1, 2)))
        ds1 = self.conv1.backward(dh)
        dx = self.gn1.backward(silu_backward(ds1, h1, s1))
        dx = dx + (dout if self.skip is None else self.skip.backward(dout))
        return dx, dtemb


class UNet:
    """Noise predictor: stem, per-level residual blocks with downsampling,
    a middle block, and a skip-connected upsampling path."""

    def __init__(self, config: ModelConfig, *, rng=None, dtype=np.float32, in_channels=3):
        rng = rng or np.random.default_rng(0)
        self.config = config
        self.dtype = dtype
        chans = config.channels
        L = config.levels
        td = config.time_embed_dim

        self.temb_lin1 = Linear(config.base_channels, td, rng=rng, dtype=dtype)
        self.temb_lin2 = Linear(td, td, rng=rng, dtype=dtype)
        self.stem = Conv2d(in_channels, chans[0], 3, rng=rng, dtype=dtype)
        self.down_blocks = [
            ResBlock(chans[l], chans[l], td, config.groups, rng=rng, dtype=dtype)
            for l in range(L)
        ]
        self.downs = [
            Conv2d(chans[l], chans[l + 1], 3, stride=2, rng=rng, dtype=dtype)
            for l in range(L - 1)
        ]
        self.mid = ResBlock(chans[-1], chans[-1], td, config.groups, rng=rng, dtype=dtype)
        self.upsample = Upsample2x()
        # 1x1 channel mixers; spatial mixing happens in the up blocks
        self.up_convs = [
            Conv2d(chans[l + 1], chans[l], 1, rng=rng, dtype=dtype)
            for l in range(L - 1)
        ]
        self.up_blocks = [
            ResBlock(chans[l], chans[l], td, config.groups, rng=rng, dtype=dtype)
            for l in range(L - 1)
        ]
        self.head_gn = GroupNorm(config.groups, chans[0], dtype=dtype)
        self.head = Conv2d(chans[0], in_channels, 3, rng=rng, dtype=dtype, zero_init=True)
        self._cache = None

    def children(self):
        out = {"temb_lin1": self.temb_lin1, "temb_lin2": self.temb_lin2, "stem": self.stem,
               "mid": self.mid, "head_gn": self.head_gn, "head": self.head}
        for l, b in enumerate(self.down_blocks):
            out[f"down_blocks.{l}"] = b
        for l, c in enumerate(self.downs):
            out[f"downs.{l}"] = c
        for l, c in enumerate(self.up_convs):
            out[f"up_convs.{l}"] = c
        for l, b in enumerate(self.up_blocks):
            out[f"up_blocks.{l}"] = b
        return out

    def named_params(self):
        yield from _walk(self.children())

    def embed_time(self, t, batch: int, remember=True) -> np.ndarray:
        raw = time_embedding(t, self.config.base_channels, dtype=self.dtype)
        if raw.shape[0] == 1 and batch > 1:
            raw = np.repeat(raw, batch, axis=0)
        h = self.temb_lin1.forward(raw, remember)
        if remember:
            self._temb_h = h
        return self.temb_lin2.forward(silu(h), remember)

    def backward_time(self, dtemb):
        dh = silu_backward(self.temb_lin2.backward(dtemb), self._temb_h)
        self.temb_lin1.backward(dh)
        self._temb_h = None

    def forward(self, x, temb, residuals=None, remember=True):
        """Predict noise. ``residuals`` is one per level (post-block add)."""
        L = self.config.levels
        if x.shape[1] % self.config.downsample_factor or x.shape[2] % self.config.downsample_factor:
            raise ShapeMismatchError(
                f"spatial dims {x.shape[1:3]} must divide by {self.config.downsample_factor}"
            )
        skips = []
        h = self.stem.forward(x, remember)
        for l in range(L):
            h = self.down_blocks[l].forward(h, temb, remember)
            if residuals is not None:
                h = h + residuals[l]
            skips.append(h)
            if l < L - 1:
                h = self.downs[l].forward(h, remember)
        h = self.mid.forward(h, temb, remember)
        for l in reversed(range(L - 1)):
            h = self.up_convs[l].forward(self.upsample.forward(h), remember)
            h = h + skips[l]
            h = self.up_blocks[l].forward(h, temb, remember)
        hg = self.head_gn.forward(h, remember)
        if remember:
            self._cache = hg
        return self.head.forward(silu(hg), remember)

    def backward(self, dout):
        """Backprop; returns (dx, dresiduals per level)."""
        L = self.config.levels
        dtemb = 0.0
        dh = self.head.backward(dout)
        dh = self.head_gn.backward(silu_backward(dh, self._cache))
        self._cache = None
        dskips = [None] * L
        for l in range(L - 1):
            dh, dt = self.up_blocks[l].backward(dh)
            dtemb = dtemb + dt
            dskips[l] = dh
            dh = self.upsample.backward(self.up_convs[l].backward(dh))
        dh, dt = self.mid.backward(dh)
        dtemb = dtemb + dt
        dres = [None] * L
        for l in reversed(range(L)):
            if l < L - 1:
                dh = self.downs[l].backward(dh) + dskips[l]
            dres[l] = dh
            dh, dt = self.down_blocks[l].backward(dh)
            dtemb = dtemb + dt
        dx = self.stem.backward(dh)
        self.backward_time(dtemb)
        return dx, dres


class ControlEncoder:
    """Conditioning tower: per-level features through zero 1x1 projections."""

    def __init__(self, config: ModelConfig, *, rng=None, dtype=np.float32):
        rng = rng or np.random.default_rng(0)
        self.config = config
        chans = config.channels
        L = config.levels
        self.stem = Conv2d(config.cond_channels, chans[0], 3, rng=rng, dtype=dtype)
        self.blocks = [Conv2d(chans[0], chans[0], 3, rng=rng, dtype=dtype)]
        self.downs = []
        for l in range(1, L):
            self.downs.append(Conv2d(chans[l - 1], chans[l], 3, stride=2, rng=rng, dtype=dtype))
            self.blocks.append(Conv2d(chans[l], chans[l], 3, rng=rng, dtype=dtype))
        self.projections = [
            Conv2d(chans[l], chans[l], 1, rng=rng, dtype=dtype, zero_init=True)
            for l in range(L)
        ]
        self._acts = None

    def children(self):
        out = {"stem": self.stem}
        for l, c in enumerate(self.blocks):
            out[f"blocks.{l}"] = c
        for l, c in enumerate(self.downs):
            out[f"downs.{l}"] = c
        for l, c in enumerate(self.projections):
            out[f"projections.{l}"] = c
        return out

    def named_params(self):
        yield from _walk(self.children())

    def forward(self, cond, remember=True):
        L = self.config.levels
        acts = []
        a0 = self.stem.forward(cond, remember)
        f = self.blocks[0].forward(silu(a0), remember)
        acts.append((a0, f))
        feats = [f]
        for l in range(1, L):
            a = self.downs[l - 1].forward(silu(feats[-1]), remember)
            f = self.blocks[l].forward(silu(a), remember)
            acts.append((a, f))
            feats.append(f)
        if remember:
            self._acts = acts
        return [self.projections[l].forward(silu(feats[l]), remember) for l in range(L)]

    def backward(self, dres):
        L = self.config.levels
        acts = self._acts
        df_next = None
        for l in reversed(range(L)):
            a, f = acts[l]
            df = silu_backward(self.projections[l].backward(dres[l]), f)
            if df_next is not None:
                df = df + df_next
            da = self.blocks[l].backward(df)
            if l > 0:
                da = silu_backward(da, a)
                df_next = silu_backward(self.downs[l - 1].backward(da), acts[l - 1][1])
            else:
                dcond = self.stem.backward(silu_backward(da, a))
        self._acts = None
        return dcond


class ConditionedDenoiser:
    """Frozen-base + control-encoder pair behind one predict call."""

    def __init__(self, base: UNet, encoder: ControlEncoder | None):
        self.base = base
        self.encoder = encoder

    def encode_cond(self, cond: np.ndarray, dtype=np.float32, remember=False):
        """Per-level residuals for a (B, 7, H, W) stack. The encoder does
        not see x_t or t, so samplers compute this once per generation."""
        if self.encoder is None:
            raise ShapeMismatchError("model has no control encoder for conditioning")
        chlast = np.ascontiguousarray(cond.transpose(0, 2, 3, 1)).astype(dtype)
        return self.encoder.forward(chlast, remember)

    def predict_eps(self, x_t, t, cond=None, remember=False, residuals=None):
        """Noise prediction. ``x_t`` is (B, H, W, 3); ``cond`` is a
        (B, 7, H, W) stack (the on-disk channel-first layout) or None.
        Precomputed ``residuals`` take precedence over ``cond``."""
        if cond is not None and residuals is None:
            if cond.shape[2:] != x_t.shape[1:3]:
                raise ShapeMismatchError(
                    f"conditioning {cond.shape[2:]} does not match input {x_t.shape[1:3]}"
                )
            residuals = self.encode_cond(cond, x_t.dtype, remember)
        temb = self.base.embed_time(t, x_t.shape[0], remember)
        return self.base.forward(x_t, temb, residuals, remember)


def _walk(children: dict):
    for name, child in children.items():
        if hasattr(child, "named_params"):
            for sub, p in child.named_params():
                yield f"{name}.{sub}", p
        elif hasattr(child, "children"):
            for sub, p in _walk(child.children()):
                yield f"{name}.{sub}", p


def collect_params(obj) -> dict[str, Param]:
    """Stable name -> Param mapping for a UNet or ControlEncoder."""
    return dict(obj.named_params())
