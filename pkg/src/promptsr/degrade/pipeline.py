"""Two-stage degradation pipeline: sample, apply, replay."""

from __future__ import annotations

import numpy as np

from ..errors import DegradationError
from ..images import MIN_SIDE, blur_image, clamp01, resize_image, validate_image
from .ops import add_gaussian_noise, add_poisson_noise, delta_kernel, gaussian_blur_kernel, jpeg_roundtrip
from .types import DegradationConfig, DegradationRecipe, StageRecipe

# Domain tags folded into the seed streams so recipe sampling and noise
# realization stay independent of each other.
_RECIPE_STREAM = 0x52454350
_NOISE_STREAM = 0x4e4f4953


def _recipe_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, _RECIPE_STREAM]))


def _noise_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, _NOISE_STREAM]))


def _sample_stage(rng: np.random.Generator, cfg: DegradationConfig, stage: int) -> StageRecipe:
    size = int(cfg.kernel_sizes[rng.integers(len(cfg.kernel_sizes))])
    sig_lo, sig_hi = cfg.sigma_range_stage1 if stage == 1 else cfg.sigma_range_stage2
    sigma = float(rng.uniform(sig_lo, sig_hi))
    mode = cfg.resize_modes[rng.integers(len(cfg.resize_modes))]
    f_lo, f_hi = cfg.resize_range_stage1 if stage == 1 else cfg.resize_range_stage2
    factor = float(rng.uniform(f_lo, f_hi))
    if rng.random() < cfg.gaussian_noise_prob:
        kind = "gaussian"
        level = float(rng.uniform(*cfg.gaussian_noise_range))
    else:
        kind = "poisson"
        level = float(rng.uniform(*cfg.poisson_scale_range))
    q_lo, q_hi = cfg.jpeg_quality_range
    quality = int(rng.integers(q_lo, q_hi + 1))
    return StageRecipe(
        blur_kernel=gaussian_blur_kernel(size, sigma),
        resize_mode=mode,
        resize_factor=factor,
        noise_kind=kind,
        noise_level=level,
        jpeg_quality=quality,
    )


def sample_recipe(config: DegradationConfig, seed: int) -> DegradationRecipe:
    """Draw a fully-resolved recipe. Same (config, seed) gives the same recipe.

    The sampling order is fixed: stage 1 params, stage 2 params, then the
    skip coin, so the skip decision never shifts the stage draws.
    """
    config.validate()
    rng = _recipe_rng(seed)
    stage1 = _sample_stage(rng, config, 1)
    stage2 = _sample_stage(rng, config, 2)
    skipped = bool(rng.random() < config.second_stage_skip_prob)
    return DegradationRecipe(
        stage1=stage1,
        stage2=stage2,
        stage2_skipped=skipped,
        final_scale=config.final_scale,
        rng_seed=seed,
    ).validate()


def apply_stage(img: np.ndarray, stage: StageRecipe,
                rng: np.random.Generator | None = None) -> np.ndarray:
    """Run one stage in the fixed order blur -> resize -> noise -> JPEG."""
    validate_image(img)
    stage.validate()
    if rng is None:
        rng = np.random.default_rng(0)
    x = blur_image(img, stage.blur_kernel)
    h = int(round(img.shape[0] * stage.resize_factor))
    w = int(round(img.shape[1] * stage.resize_factor))
    if h < MIN_SIDE or w < MIN_SIDE:
        raise DegradationError(
            f"stage resize to {h}x{w} falls below the minimum side {MIN_SIDE}")
    x = resize_image(x, h, w, mode=stage.resize_mode)
    if stage.noise_kind == "gaussian":
        if stage.noise_level > 0:
            x = add_gaussian_noise(x, stage.noise_level, rng)
    else:
        x = add_poisson_noise(x, stage.noise_level, rng)
    if stage.jpeg_quality is not None:
        x = jpeg_roundtrip(x, stage.jpeg_quality)
    return x


def replay_recipe(hr: np.ndarray, recipe: DegradationRecipe) -> np.ndarray:
    """Reproduce the LR image for a recipe, bit-identically."""
    validate_image(hr)
    recipe.validate()
    h, w = hr.shape[:2]
    s = recipe.final_scale
    if h % s != 0 or w % s != 0:
        raise ValueError(f"HR size {h}x{w} must be divisible by final_scale={s}")
    rng = _noise_rng(recipe.rng_seed)
    x = hr
    for stage in recipe.stages():
        x = apply_stage(x, stage, rng)
    x = resize_image(x, h // s, w // s, mode="bicubic")
    return clamp01(x.astype(np.float32))


def synthesize_pair(hr: np.ndarray, config: DegradationConfig,
                    seed: int) -> tuple[np.ndarray, DegradationRecipe]:
    """Sample a recipe and produce (lr, recipe) for one HR image."""
    recipe = sample_recipe(config, seed)
    lr = replay_recipe(hr, recipe)
    return lr, recipe


def identity_recipe(final_scale: int = 4, seed: int = 0) -> DegradationRecipe:
    """Recipe that reduces the chain to the terminal bicubic downsample.

    Delta blur, unit resize, zero gaussian noise, JPEG disabled on both
    stages; stage 2 skipped. Used by tests and the clean-downsample arm.
    """
    stage = StageRecipe(
        blur_kernel=delta_kernel(),
        resize_mode="bicubic",
        resize_factor=1.0,
        noise_kind="gaussian",
        noise_level=0.0,
        jpeg_quality=None,
    )
    return DegradationRecipe(
        stage1=stage,
        stage2=StageRecipe.from_dict(stage.to_dict()),
        stage2_skipped=True,
        final_scale=final_scale,
        rng_seed=seed,
    ).validate()
