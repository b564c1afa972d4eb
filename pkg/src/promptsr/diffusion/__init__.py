"""Toy latent diffusion stack: VAE, schedule, UNet with TCA/RCA, trainers."""

from .schedule import NoiseSchedule, add_noise, make_schedule, spaced_subset
from .srops import bundle_contexts, predict_noise, sr_training_loss
from .textenc import TextEncoderToy, encode_text
from .train_base import build_base_pool, heldout_base_loss, train_base
from .train_sr import build_sr_pool, heldout_sr_loss, train_sr
from .unet import (
    AttentionBlock,
    ControlBranch,
    ControlledUNet,
    CrossAttention,
    DiffusionConfig,
    ResBlock,
    ToyUNet,
    rca_parameter_names,
    timestep_embedding,
)
from .vae import ToyVAE, VAEConfig, train_vae, vae_decode, vae_encode

__all__ = [
    "AttentionBlock",
    "ControlBranch",
    "ControlledUNet",
    "CrossAttention",
    "DiffusionConfig",
    "NoiseSchedule",
    "ResBlock",
    "TextEncoderToy",
    "ToyUNet",
    "ToyVAE",
    "VAEConfig",
    "add_noise",
    "build_base_pool",
    "build_sr_pool",
    "bundle_contexts",
    "encode_text",
    "heldout_base_loss",
    "heldout_sr_loss",
    "make_schedule",
    "predict_noise",
    "rca_parameter_names",
    "spaced_subset",
    "sr_training_loss",
    "timestep_embedding",
    "train_base",
    "train_sr",
    "train_vae",
    "vae_decode",
    "vae_encode",
]
