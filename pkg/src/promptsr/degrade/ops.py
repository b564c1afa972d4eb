"""Primitive degradation operators on float images in [0, 1]."""

from __future__ import annotations

import cv2
import numpy as np

from ..errors import DegradationError
from ..images import clamp01, validate_image


def gaussian_blur_kernel(size: int, sigma: float) -> np.ndarray:
    """Isotropic Gaussian kernel, [size, size] float64, normalized to sum 1.

    As sigma -> 0 the off-center weights underflow and the kernel degenerates
    to a discrete delta, making blur the identity.
    """
    if size < 3 or size % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 3, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    r = size // 2
    ax = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def delta_kernel() -> np.ndarray:
    """1x1 identity kernel; blurring with it is a no-op."""
    return np.ones((1, 1), dtype=np.float64)


def add_gaussian_noise(img: np.ndarray, sigma: float, rng: np.random.Generator,
                       clamp: bool = True) -> np.ndarray:
    """Additive iid Gaussian noise with standard deviation sigma.

    With clamp=False the raw noisy signal is returned, which is what the
    variance diagnostics need; production paths clamp back into [0, 1].
    """
    validate_image(img)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    out = img.astype(np.float32) + rng.normal(0.0, sigma, size=img.shape).astype(np.float32)
    return clamp01(out) if clamp else out


def add_poisson_noise(img: np.ndarray, scale: float, rng: np.random.Generator,
                      clamp: bool = True) -> np.ndarray:
    """Shot noise: x -> Poisson(x * scale) / scale. Larger scale, less noise."""
    validate_image(img)
    if scale <= 0:
        raise ValueError("poisson scale must be > 0")
    lam = np.clip(img.astype(np.float64), 0.0, None) * scale
    out = (rng.poisson(lam) / scale).astype(np.float32)
    return clamp01(out) if clamp else out


def jpeg_roundtrip(img: np.ndarray, quality: int) -> np.ndarray:
    """Encode to JPEG at the given quality and decode back to float32.

    Quantizes to uint8 first, so even quality 100 is not lossless.
    """
    validate_image(img)
    if not 1 <= quality <= 100:
        raise ValueError(f"JPEG quality must be in [1, 100], got {quality}")
    u8 = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    params = [int(cv2.IMWRITE_JPEG_QUALITY), int(quality)]
    if u8.shape[2] == 1:
        ok, buf = cv2.imencode(".jpg", u8[:, :, 0], params)
        if not ok:
            raise DegradationError("JPEG encode failed")
        dec = cv2.imdecode(buf, cv2.IMREAD_GRAYSCALE)[:, :, None]
    else:
        ok, buf = cv2.imencode(".jpg", cv2.cvtColor(u8, cv2.COLOR_RGB2BGR), params)
        if not ok:
            raise DegradationError("JPEG encode failed")
        dec = cv2.cvtColor(cv2.imdecode(buf, cv2.IMREAD_COLOR), cv2.COLOR_BGR2RGB)
    return (dec.astype(np.float32) / 255.0).astype(np.float32)
