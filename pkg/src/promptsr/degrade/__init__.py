"""Two-stage stochastic degradation synthesis with replayable recipes."""

from .ops import (
    add_gaussian_noise,
    add_poisson_noise,
    delta_kernel,
    gaussian_blur_kernel,
    jpeg_roundtrip,
)
from .pipeline import apply_stage, identity_recipe, replay_recipe, sample_recipe, synthesize_pair
from .types import DegradationConfig, DegradationRecipe, StageRecipe

__all__ = [
    "DegradationConfig",
    "DegradationRecipe",
    "StageRecipe",
    "add_gaussian_noise",
    "add_poisson_noise",
    "apply_stage",
    "delta_kernel",
    "gaussian_blur_kernel",
    "identity_recipe",
    "jpeg_roundtrip",
    "replay_recipe",
    "sample_recipe",
    "synthesize_pair",
]
