"""Bundle-level conditioned ops: noise prediction and the SR training loss."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..prompts import PromptBundle
from .schedule import NoiseSchedule, add_noise
from .textenc import TextEncoderToy
from .unet import ControlledUNet


def bundle_contexts(bundle: PromptBundle, text_encoder: TextEncoderToy, batch: int = 1):
    """(text_ctx [B, L, Dt], soft_ctx [B, S, Ds]) for one shared bundle."""
    text_ctx = text_encoder.encode(bundle.hard)[None]
    soft_ctx = None if bundle.soft is None else bundle.soft[None]
    if batch > 1:
        text_ctx = text_ctx.expand(batch, -1, -1)
        if soft_ctx is not None:
            soft_ctx = soft_ctx.expand(batch, -1, -1)
    return text_ctx, soft_ctx


def predict_noise(model, z_t: torch.Tensor, t, lr_image, bundle: PromptBundle,
                  text_encoder: TextEncoderToy) -> torch.Tensor:
    """Epsilon estimate conditioned on the prompt bundle and LR control image."""
    text_ctx, soft_ctx = bundle_contexts(bundle, text_encoder, z_t.shape[0])
    if isinstance(model, ControlledUNet):
        return model(z_t, t, text_ctx, soft_ctx, lr_image)
    return model(z_t, t, text_ctx, soft_ctx)


def sr_training_loss(model, z0: torch.Tensor, lr_image, bundle: PromptBundle,
                     schedule: NoiseSchedule, rng: np.random.Generator,
                     text_encoder: TextEncoderToy) -> torch.Tensor:
    """One-sample denoising objective: ||eps - eps_hat(add_noise(z0, eps, t))||^2.

    t is drawn uniform over [1, T] and eps is standard normal, both from rng,
    so a seeded generator makes the loss a deterministic function of inputs.
    """
    t = int(rng.integers(1, schedule.T + 1))
    eps = torch.from_numpy(rng.standard_normal(tuple(z0.shape)).astype(np.float32))
    z_t = add_noise(z0, eps, t, schedule)
    eps_hat = predict_noise(model, z_t, t, lr_image, bundle, text_encoder)
    return F.mse_loss(eps_hat, eps)
