"""Small convolutional VAE providing the latent space for diffusion.

encode() is deterministic (posterior mean) as required by SR usage; the
reparameterized sample is only drawn inside train_vae. Latents are
standardized by a scale factor fitted after training so that z_0 statistics
are roughly unit variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..dataset import ToyDataset
from ..errors import ConfigError
from ..images import from_torch, to_torch, validate_image


@dataclass
class VAEConfig:
    latent_channels: int = 4
    base_channels: int = 32
    downscale: int = 4  # must be a power of two (stride-2 stages)
    groups: int = 8
    kl_weight: float = 1e-6
    lr: float = 1e-3
    batch_size: int = 16
    iterations: int = 800
    crop: int = 64
    holdout_every: int = 100

    def validate(self) -> "VAEConfig":
        n = self.downscale
        if n < 2 or (n & (n - 1)) != 0:
            raise ConfigError("downscale must be a power of two >= 2")
        if self.base_channels % self.groups != 0:
            raise ConfigError("base_channels must be divisible by groups")
        if self.crop % self.downscale != 0:
            raise ConfigError("crop must be divisible by downscale")
        return self

    @property
    def n_stages(self) -> int:
        return int(np.log2(self.downscale))


def _block(c_in, c_out, groups):
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, 3, padding=1),
        nn.GroupNorm(groups, c_out),
        nn.SiLU(),
    )


class ToyVAE(nn.Module):
    def __init__(self, cfg: VAEConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        c = cfg.base_channels
        enc = [_block(3, c, cfg.groups)]
        ch = c
        for _ in range(cfg.n_stages):
            enc.append(nn.Conv2d(ch, ch * 2, 3, stride=2, padding=1))
            enc.append(nn.GroupNorm(cfg.groups, ch * 2))
            enc.append(nn.SiLU())
            ch *= 2
        enc.append(nn.Conv2d(ch, 2 * cfg.latent_channels, 3, padding=1))
        self.encoder = nn.Sequential(*enc)

        dec = [_block(cfg.latent_channels, ch, cfg.groups)]
        for _ in range(cfg.n_stages):
            dec.append(nn.Upsample(scale_factor=2, mode="nearest"))
            dec.append(nn.Conv2d(ch, ch // 2, 3, padding=1))
            dec.append(nn.GroupNorm(cfg.groups, ch // 2))
            dec.append(nn.SiLU())
            ch //= 2
        dec.append(nn.Conv2d(ch, 3, 3, padding=1))
        self.decoder = nn.Sequential(*dec)
        # fitted after training; encode multiplies, decode divides
        self.register_buffer("latent_scale", torch.ones(()))

    def encode_params(self, x: torch.Tensor):
        h = self.encoder(x)
        mu, logvar = torch.chunk(h, 2, dim=1)
        return mu, logvar

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        """Deterministic scaled posterior mean."""
        self._check_size(x)
        mu, _ = self.encode_params(x)
        return mu * self.latent_scale

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        return self.decoder(z / self.latent_scale)

    def _check_size(self, x: torch.Tensor):
        if x.shape[-1] % self.cfg.downscale or x.shape[-2] % self.cfg.downscale:
            raise ValueError(
                f"image sides {tuple(x.shape[-2:])} must be divisible by downscale={self.cfg.downscale}")


def vae_encode(model: ToyVAE, image: np.ndarray) -> torch.Tensor:
    """Float image [H, W, C] -> latent [1, c, H/d, W/d], deterministic."""
    validate_image(image)
    if image.shape[2] == 1:
        image = np.repeat(image, 3, axis=2)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            z = model.encode(to_torch(image))
    finally:
        model.train(was_training)
    return z.detach()


def vae_decode(model: ToyVAE, latent: torch.Tensor) -> np.ndarray:
    """Latent [1, c, h, w] -> clamped float image [H, W, 3]."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            x = model.decode(latent)
    finally:
        model.train(was_training)
    return from_torch(torch.clamp(x, 0.0, 1.0))


def _crop_batch(images, crop, batch, rng):
    out = []
    for _ in range(batch):
        img = images[rng.integers(len(images))]
        h, w = img.shape[:2]
        y = int(rng.integers(0, h - crop + 1))
        x = int(rng.integers(0, w - crop + 1))
        out.append(np.transpose(img[y:y + crop, x:x + crop], (2, 0, 1)))
    return torch.from_numpy(np.stack(out).astype(np.float32))


def train_vae(ds: ToyDataset, cfg: VAEConfig, seed: int = 0, log=None):
    """Train on random HR crops; returns (model, history)."""
    cfg.validate()
    torch.manual_seed(seed)
    model = ToyVAE(cfg)
    train_imgs = [ds.load_hr(r) for r in ds.records("train")]
    val_imgs = [ds.load_hr(r) for r in ds.records("val")]
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x766165]))
    x_val = _crop_batch(val_imgs, cfg.crop, min(32, 4 * len(val_imgs)), rng)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)

    @torch.no_grad()
    def val_metrics():
        was_training = model.training
        model.eval()
        mu, _ = model.encode_params(x_val)
        rec = model.decoder(mu)
        model.train(was_training)
        mse = float(F.mse_loss(torch.clamp(rec, 0, 1), x_val))
        psnr = 100.0 if mse <= 0 else min(100.0, 10.0 * float(np.log10(1.0 / mse)))
        return {"val_mse": mse, "val_psnr": psnr}

    history = {"initial": val_metrics(), "steps": []}
    model.train()
    for step in range(1, cfg.iterations + 1):
        xb = _crop_batch(train_imgs, cfg.crop, cfg.batch_size, rng)
        mu, logvar = model.encode_params(xb)
        logvar = torch.clamp(logvar, -30.0, 10.0)
        z = mu + torch.exp(0.5 * logvar) * torch.randn_like(mu)
        rec = model.decoder(z)
        rec_loss = F.mse_loss(rec, xb)
        kl = -0.5 * torch.mean(1.0 + logvar - mu ** 2 - torch.exp(logvar))
        loss = rec_loss + cfg.kl_weight * kl
        opt.zero_grad()
        loss.backward()
        opt.step()
        if log is not None and (step % cfg.holdout_every == 0 or step == cfg.iterations):
            entry = {"step": step, "loss": loss.item(), "rec": rec_loss.item(), "kl": kl.item()}
            entry.update(val_metrics())
            history["steps"].append(entry)
            log(entry)

    # standardize latents: unit std over a sample of training crops
    model.eval()
    with torch.no_grad():
        xs = _crop_batch(train_imgs, cfg.crop, min(64, 8 * len(train_imgs)), rng)
        mu, _ = model.encode_params(xs)
        std = float(mu.std())
    model.latent_scale.fill_(1.0 / max(std, 1e-6))
    history["final"] = val_metrics()
    history["latent_scale"] = float(model.latent_scale)
    return model, history
