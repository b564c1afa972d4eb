"""Degradation configuration and fully-resolved recipes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

RESIZE_MODES = ("bicubic", "bilinear", "area")
NOISE_KINDS = ("gaussian", "poisson")

KERNEL_SUM_TOL = 1e-6


def _check_range(name: str, rng: tuple) -> None:
    if len(rng) != 2 or rng[0] > rng[1]:
        raise ConfigError(f"degradation range {name} must be (min, max) with min <= max, got {rng}")


@dataclass
class DegradationConfig:
    """Sampling ranges for the two-stage degradation chain.

    Defaults mirror the shape of the classic second-order real-world SR
    synthesis chain while staying fully tunable.
    """

    kernel_sizes: tuple = (7, 9, 11, 13, 15, 17, 19, 21)
    sigma_range_stage1: tuple = (0.2, 3.0)
    sigma_range_stage2: tuple = (0.2, 1.5)
    resize_modes: tuple = RESIZE_MODES
    resize_range_stage1: tuple = (0.5, 1.5)
    resize_range_stage2: tuple = (0.3, 1.2)
    gaussian_noise_range: tuple = (0.0, 0.1)
    poisson_scale_range: tuple = (50.0, 400.0)
    gaussian_noise_prob: float = 0.5
    jpeg_quality_range: tuple = (30, 95)
    second_stage_skip_prob: float = 0.2
    final_scale: int = 4

    def validate(self) -> "DegradationConfig":
        if not self.kernel_sizes:
            raise ConfigError("kernel_sizes must be non-empty")
        for k in self.kernel_sizes:
            if k < 3 or k % 2 == 0:
                raise ConfigError(f"kernel sizes must be odd and >= 3, got {k}")
        _check_range("sigma_range_stage1", self.sigma_range_stage1)
        _check_range("sigma_range_stage2", self.sigma_range_stage2)
        _check_range("resize_range_stage1", self.resize_range_stage1)
        _check_range("resize_range_stage2", self.resize_range_stage2)
        _check_range("gaussian_noise_range", self.gaussian_noise_range)
        _check_range("poisson_scale_range", self.poisson_scale_range)
        _check_range("jpeg_quality_range", self.jpeg_quality_range)
        if not self.resize_modes or any(m not in RESIZE_MODES for m in self.resize_modes):
            raise ConfigError(f"resize_modes must be a non-empty subset of {RESIZE_MODES}")
        if not 0.0 <= self.gaussian_noise_prob <= 1.0:
            raise ConfigError("gaussian_noise_prob must be in [0, 1]")
        if not 0.0 <= self.second_stage_skip_prob <= 1.0:
            raise ConfigError("second_stage_skip_prob must be in [0, 1]")
        if self.resize_range_stage1[0] <= 0 or self.resize_range_stage2[0] <= 0:
            raise ConfigError("resize factors must be > 0")
        if self.final_scale < 1:
            raise ConfigError("final_scale must be >= 1")
        return self


@dataclass
class StageRecipe:
    """One resolved degradation stage: blur -> resize -> noise -> JPEG."""

    blur_kernel: np.ndarray  # [k, k], entries >= 0, sums to 1
    resize_mode: str
    resize_factor: float
    noise_kind: str  # gaussian | poisson
    noise_level: float  # sigma for gaussian, scale L for poisson
    jpeg_quality: int | None  # None disables the codec round-trip

    def validate(self) -> "StageRecipe":
        k = self.blur_kernel
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
            raise ConfigError("blur kernel must be square with odd side length")
        if abs(float(k.sum()) - 1.0) > KERNEL_SUM_TOL:
            raise ConfigError(f"blur kernel must sum to 1 +/- {KERNEL_SUM_TOL}")
        if self.resize_mode not in RESIZE_MODES:
            raise ConfigError(f"unknown resize mode {self.resize_mode!r}")
        if self.resize_factor <= 0:
            raise ConfigError("resize factor must be > 0")
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind {self.noise_kind!r}")
        if self.noise_level < 0:
            raise ConfigError("noise level must be >= 0")
        return self

    def to_dict(self) -> dict:
        return {
            "blur_kernel": self.blur_kernel.tolist(),
            "resize_mode": self.resize_mode,
            "resize_factor": self.resize_factor,
            "noise_kind": self.noise_kind,
            "noise_level": self.noise_level,
            "jpeg_quality": self.jpeg_quality,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StageRecipe":
        return cls(
            blur_kernel=np.asarray(d["blur_kernel"], dtype=np.float64),
            resize_mode=d["resize_mode"],
            resize_factor=float(d["resize_factor"]),
            noise_kind=d["noise_kind"],
            noise_level=float(d["noise_level"]),
            jpeg_quality=None if d["jpeg_quality"] is None else int(d["jpeg_quality"]),
        ).validate()


@dataclass
class DegradationRecipe:
    """Fully-resolved two-stage chain; replay is bit-identical given the seed."""

    stage1: StageRecipe
    stage2: StageRecipe
    stage2_skipped: bool
    final_scale: int
    rng_seed: int
    final_resize: str = field(default="terminal_bicubic")

    def validate(self) -> "DegradationRecipe":
        self.stage1.validate()
        self.stage2.validate()
        if self.final_scale < 1:
            raise ConfigError("final_scale must be >= 1")
        return self

    def stages(self):
        yield self.stage1
        if not self.stage2_skipped:
            yield self.stage2

    def to_dict(self) -> dict:
        return {
            "stage1": self.stage1.to_dict(),
            "stage2": self.stage2.to_dict(),
            "stage2_skipped": self.stage2_skipped,
            "final_scale": self.final_scale,
            "rng_seed": self.rng_seed,
            "final_resize": self.final_resize,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DegradationRecipe":
        return cls(
            stage1=StageRecipe.from_dict(d["stage1"]),
            stage2=StageRecipe.from_dict(d["stage2"]),
            stage2_skipped=bool(d["stage2_skipped"]),
            final_scale=int(d["final_scale"]),
            rng_seed=int(d["rng_seed"]),
            final_resize=d.get("final_resize", "terminal_bicubic"),
        ).validate()
