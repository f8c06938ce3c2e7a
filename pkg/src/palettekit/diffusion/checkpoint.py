"""Versioned binary checkpoint container.

Layout: 8-byte magic, uint64 little-endian manifest length, UTF-8 JSON
manifest, then the concatenated raw little-endian float32 parameter blobs
in manifest order. The manifest records config, schedule, variant,
metadata, per-blob offsets, and the SHA-256 of the base parameters (the
frozenness witness).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import CheckpointError
from .model import ConditionedDenoiser, ControlEncoder, ModelConfig, UNet
from .schedule import NoiseSchedule, make_schedule

MAGIC = b"PKDQ0001"


@dataclass
class Checkpoint:
    config: ModelConfig
    schedule: NoiseSchedule
    variant: str | None
    base_params: dict[str, np.ndarray]
    control_params: dict[str, np.ndarray] | None = None
    metadata: dict = field(default_factory=dict)

    def base_hash(self) -> str:
        return base_hash(self.base_params)

    def build(self) -> ConditionedDenoiser:
        """Materialize networks with this checkpoint's parameters."""
        base = UNet(self.config)
        _load_into(base, self.base_params, "base")
        encoder = None
        if self.control_params is not None:
            encoder = ControlEncoder(self.config)
            _load_into(encoder, self.control_params, "control")
        return ConditionedDenoiser(base, encoder)


def base_hash(params: dict[str, np.ndarray]) -> str:
    """SHA-256 over parameter names and raw float32 bytes, sorted by name."""
    h = hashlib.sha256()
    for name in sorted(params):
        h.update(name.encode("utf-8"))
        h.update(np.ascontiguousarray(params[name], dtype="<f4").tobytes())
    return h.hexdigest()


def snapshot_params(obj) -> dict[str, np.ndarray]:
    """Copy a model's parameters into a plain name -> float32 array dict."""
    return {name: p.value.astype(np.float32).copy() for name, p in obj.named_params()}


def _load_into(obj, params: dict[str, np.ndarray], scope: str) -> None:
    own = dict(obj.named_params())
    if set(own) != set(params):
        missing = set(own) ^ set(params)
        raise CheckpointError(f"{scope} parameter names do not match: {sorted(missing)[:4]}")
    for name, p in own.items():
        stored = params[name]
        if stored.shape != p.value.shape:
            raise CheckpointError(
                f"{scope}.{name}: shape {stored.shape} != expected {p.value.shape}"
            )
        p.value[...] = stored.astype(p.value.dtype)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    blobs = []
    entries = []
    offset = 0
    for scope, params in (("base", ckpt.base_params), ("control", ckpt.control_params)):
        if params is None:
            continue
        for name in sorted(params):
            raw = np.ascontiguousarray(params[name], dtype="<f4").tobytes()
            entries.append(
                {
                    "name": name,
                    "scope": scope,
                    "shape": list(params[name].shape),
                    "offset": offset,
                    "nbytes": len(raw),
                }
            )
            blobs.append(raw)
            offset += len(raw)
    manifest = {
        "version": 1,
        "config": ckpt.config.to_dict(),
        "schedule": {"kind": ckpt.schedule.kind, "T": ckpt.schedule.T},
        "variant": ckpt.variant,
        "metadata": ckpt.metadata,
        "base_hash": ckpt.base_hash(),
        "params": entries,
    }
    payload = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)
        for raw in blobs:
            fh.write(raw)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise CheckpointError(f"bad checkpoint magic {magic!r}")
        (mlen,) = struct.unpack("<Q", fh.read(8))
        manifest = json.loads(fh.read(mlen).decode("utf-8"))
        blob = fh.read()
    if manifest.get("version") != 1:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('version')}")
    base: dict[str, np.ndarray] = {}
    control: dict[str, np.ndarray] = {}
    for e in manifest["params"]:
        arr = np.frombuffer(blob, dtype="<f4", count=e["nbytes"] // 4, offset=e["offset"])
        arr = arr.reshape(e["shape"]).copy()
        (base if e["scope"] == "base" else control)[e["name"]] = arr
    sched = make_schedule(manifest["schedule"]["T"], manifest["schedule"]["kind"])
    ckpt = Checkpoint(
        config=ModelConfig.from_dict(manifest["config"]),
        schedule=sched,
        variant=manifest["variant"],
        base_params=base,
        control_params=control or None,
        metadata=manifest["metadata"],
    )
    if ckpt.base_hash() != manifest["base_hash"]:
        raise CheckpointError("base parameter hash mismatch (corrupt checkpoint)")
    return ckpt
