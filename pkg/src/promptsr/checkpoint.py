"""Versioned single-file checkpoint container and weight checksums."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .errors import CheckpointError

FORMAT_VERSION = 1

KINDS = ("teacher", "dape", "vae", "base_unet", "sr_control", "text_encoder")


@dataclass
class Checkpoint:
    kind: str
    arch: dict  # hyperparameters needed to rebuild the module
    state_dict: dict
    step: int = 0
    config_hash: str = ""
    extra: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def state_checksum(state) -> str:
    """SHA-256 over parameter names and raw tensor bytes, order-canonical.

    Accepts a module or a state dict. Identical weights give identical
    checksums regardless of device or insertion order.
    """
    if isinstance(state, torch.nn.Module):
        state = state.state_dict()
    h = hashlib.sha256()
    for name in sorted(state.keys()):
        t = state[name]
        h.update(name.encode())
        if isinstance(t, torch.Tensor):
            h.update(str(t.dtype).encode())
            h.update(",".join(map(str, t.shape)).encode())
            h.update(t.detach().cpu().contiguous().numpy().tobytes())
        else:
            h.update(repr(t).encode())
    return h.hexdigest()


def save_checkpoint(ckpt: Checkpoint, path) -> Path:
    if ckpt.kind not in KINDS:
        raise CheckpointError(f"unknown checkpoint kind {ckpt.kind!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": ckpt.format_version,
        "kind": ckpt.kind,
        "arch": ckpt.arch,
        "state_dict": {k: v.detach().cpu() if isinstance(v, torch.Tensor) else v
                       for k, v in ckpt.state_dict.items()},
        "step": ckpt.step,
        "config_hash": ckpt.config_hash,
        "extra": ckpt.extra,
        "checksum": state_checksum(ckpt.state_dict),
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path, expect_kind: str | None = None) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as e:
        raise CheckpointError(f"unreadable checkpoint {path}: {e}") from e
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has format version {version}, expected {FORMAT_VERSION}")
    kind = payload.get("kind")
    if expect_kind is not None and kind != expect_kind:
        raise CheckpointError(f"checkpoint {path} is kind {kind!r}, expected {expect_kind!r}")
    stored = payload.get("checksum")
    actual = state_checksum(payload["state_dict"])
    if stored != actual:
        raise CheckpointError(f"checkpoint {path} failed its integrity checksum")
    return Checkpoint(
        kind=kind,
        arch=payload["arch"],
        state_dict=payload["state_dict"],
        step=int(payload.get("step", 0)),
        config_hash=payload.get("config_hash", ""),
        extra=payload.get("extra", {}),
        format_version=version,
    )
