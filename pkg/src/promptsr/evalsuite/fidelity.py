"""PSNR and SSIM on the [0, 1] scale, optionally on the BT.601 Y channel."""

from __future__ import annotations

import numpy as np

from ..images import resize_image, rgb_to_y, validate_image
from ..kernels import correlate2d_reflect, gaussian_window, ssim_mean

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

_ssim_win = None


def _check_pair(a: np.ndarray, b: np.ndarray):
    validate_image(a)
    validate_image(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def _planes(img: np.ndarray, y_channel: bool):
    if y_channel and img.shape[2] == 3:
        return [rgb_to_y(img)]
    return [img[:, :, c].astype(np.float64) for c in range(img.shape[2])]


def psnr(a: np.ndarray, b: np.ndarray, y_channel: bool = True) -> float:
    """10·log10(1 / MSE) in dB; identical inputs report the 100 dB cap."""
    _check_pair(a, b)
    pa, pb = _planes(a, y_channel), _planes(b, y_channel)
    mse = float(np.mean([np.mean((x - y) ** 2) for x, y in zip(pa, pb)]))
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, float(10.0 * np.log10(1.0 / mse)))


def ssim(a: np.ndarray, b: np.ndarray, y_channel: bool = True) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5), valid-mode."""
    global _ssim_win
    _check_pair(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} px per side for SSIM")
    if _ssim_win is None:
        _ssim_win = gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    pa, pb = _planes(a, y_channel), _planes(b, y_channel)
    vals = [ssim_mean(np.ascontiguousarray(x), np.ascontiguousarray(y),
                      _ssim_win, SSIM_C1, SSIM_C2)
            for x, y in zip(pa, pb)]
    return float(np.mean(vals))


def flat_region_mask(hr: np.ndarray, percentile: float = 20.0,
                     window: int = 5) -> np.ndarray:
    """Boolean mask of HR pixels whose local luma variance is below the
    given percentile. Defines "flat regions" for the LRE deviation check."""
    validate_image(hr)
    y = rgb_to_y(hr) if hr.shape[2] == 3 else hr[:, :, 0].astype(np.float64)
    box = np.full((window, window), 1.0 / (window * window))
    mean = correlate2d_reflect(np.ascontiguousarray(y), box)
    sq_mean = correlate2d_reflect(np.ascontiguousarray(y * y), box)
    local_var = np.maximum(sq_mean - mean * mean, 0.0)
    return local_var <= np.percentile(local_var, percentile)


def flat_region_deviation(sr: np.ndarray, lr: np.ndarray, hr: np.ndarray,
                          percentile: float = 20.0) -> float:
    """Mean |SR - bicubic_upsample(LR)| luma difference over flat HR regions.

    Lower means the output hallucinates less texture where the scene is flat.
    """
    validate_image(sr)
    validate_image(lr)
    if sr.shape != hr.shape:
        raise ValueError(f"SR shape {sr.shape} must match HR shape {hr.shape}")
    up = resize_image(lr, hr.shape[0], hr.shape[1], mode="bicubic")
    mask = flat_region_mask(hr, percentile)
    diff = np.abs(rgb_to_y(sr) - rgb_to_y(up)) if sr.shape[2] == 3 else \
        np.abs(sr[:, :, 0].astype(np.float64) - up[:, :, 0].astype(np.float64))
    return float(diff[mask].mean())
