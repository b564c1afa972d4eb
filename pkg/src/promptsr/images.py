"""Pixel-space image helpers.

Images are float32 numpy arrays of shape [H, W, C] (C = 3 or 1) with values
in [0, 1]. This is the currency every pipeline stage speaks; torch tensors
appear only inside models.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from . import kernels
from .errors import DegradationError

# ITU-R BT.601 luma coefficients
_BT601 = np.array([0.299, 0.587, 0.114], dtype=np.float64)

MIN_SIDE = 8


def validate_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"{name} must be an [H, W, C] array with C in (1, 3)")
    if img.shape[0] < MIN_SIDE or img.shape[1] < MIN_SIDE:
        raise ValueError(f"{name} sides must be >= {MIN_SIDE}, got {img.shape[:2]}")
    return img


def clamp01(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def rgb_to_y(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of an RGB image; single-channel images pass through."""
    if img.shape[2] == 1:
        return img[:, :, 0].astype(np.float64)
    return img.astype(np.float64) @ _BT601


def resize_image(img: np.ndarray, out_h: int, out_w: int, mode: str = "bicubic",
                 antialias: bool = True, clamp: bool = True) -> np.ndarray:
    """Separable resample of an [H, W, C] image to [out_h, out_w, C]."""
    if out_h < MIN_SIDE or out_w < MIN_SIDE:
        raise DegradationError(f"resize target {out_h}x{out_w} is below the minimum side {MIN_SIDE}")
    h, w = img.shape[:2]
    idx_r, w_r = kernels.resize_weights(h, out_h, mode, antialias)
    idx_c, w_c = kernels.resize_weights(w, out_w, mode, antialias)
    src = np.ascontiguousarray(img, dtype=np.float64)
    out = np.stack(
        [kernels.resize_separable(np.ascontiguousarray(src[:, :, c]), idx_r, w_r, idx_c, w_c)
         for c in range(img.shape[2])],
        axis=-1,
    )
    out = out.astype(np.float32)
    return clamp01(out) if clamp else out


def blur_image(img: np.ndarray, kernel: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Correlate each channel with a 2-D kernel (mirror boundary)."""
    src = np.ascontiguousarray(img, dtype=np.float64)
    k = np.ascontiguousarray(kernel, dtype=np.float64)
    out = np.stack(
        [kernels.correlate2d_reflect(np.ascontiguousarray(src[:, :, c]), k)
         for c in range(img.shape[2])],
        axis=-1,
    ).astype(np.float32)
    return clamp01(out) if clamp else out


def load_image(path) -> np.ndarray:
    """Load a PNG/JPEG file as a float32 RGB image in [0, 1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    return arr


def save_image(img: np.ndarray, path) -> None:
    """Save a [0, 1] float image as 8-bit PNG."""
    arr = np.clip(np.rint(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(path)


def to_torch(img: np.ndarray):
    """[H, W, C] float image -> [1, C, H, W] float32 tensor."""
    import torch

    return torch.from_numpy(np.ascontiguousarray(img.astype(np.float32))).permute(2, 0, 1).unsqueeze(0)


def from_torch(t) -> np.ndarray:
    """[1, C, H, W] or [C, H, W] tensor -> clamped [H, W, C] float32 image."""
    if t.dim() == 4:
        t = t[0]
    arr = t.detach().cpu().float().permute(1, 2, 0).numpy()
    return clamp01(arr)
