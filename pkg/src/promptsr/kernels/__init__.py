"""Hot image kernels: compiled core with a numpy fallback.

The compiled extension (``_native``) is preferred; if it is unavailable the
numpy/scipy ``reference`` backend is used. ``PROMPTSR_KERNELS`` overrides the
choice (``auto``, ``native`` or ``reference``).
"""

import os

_choice = os.environ.get("PROMPTSR_KERNELS", "auto")
if _choice not in ("auto", "native", "reference"):
    raise RuntimeError(f"PROMPTSR_KERNELS must be auto|native|reference, got {_choice!r}")

if _choice == "reference":
    from . import reference as _impl

    BACKEND = "reference"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        if _choice == "native":
            raise
        from . import reference as _impl

        BACKEND = "reference"

correlate2d_reflect = _impl.correlate2d_reflect
resize_separable = _impl.resize_separable
ssim_mean = _impl.ssim_mean

from .filters import RESIZE_MODES, gaussian_window, resize_weights  # noqa: E402

__all__ = [
    "BACKEND",
    "RESIZE_MODES",
    "correlate2d_reflect",
    "gaussian_window",
    "resize_separable",
    "resize_weights",
    "ssim_mean",
]
