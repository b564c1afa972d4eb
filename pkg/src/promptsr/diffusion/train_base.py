"""Stage zero: train the text-conditioned base diffusion prior on clean crops."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..dataset import ToyDataset
from ..toydata import tags_in_rect
from .textenc import TextEncoderToy
from .unet import DiffusionConfig, ToyUNet
from .vae import ToyVAE, vae_encode


def _noised_batch(z0: torch.Tensor, t_vec: torch.Tensor, eps: torch.Tensor,
                  abar: torch.Tensor) -> torch.Tensor:
    """Vectorized forward diffusion with per-sample timesteps (1-indexed)."""
    a = abar[t_vec - 1].float().view(-1, 1, 1, 1)
    return z0 * torch.sqrt(a) + eps * torch.sqrt(1.0 - a)


def build_base_pool(ds: ToyDataset, vae: ToyVAE, text_encoder: TextEncoderToy,
                    cfg: DiffusionConfig, seed: int, split: str):
    """Clean-crop latents with crop-local tag contexts: (z0 [N,c,h,w], ctx [N,L,D])."""
    split_tag = int.from_bytes(split.encode()[:4].ljust(4, b"\0"), "big")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x62617365, split_tag]))
    latents, ctxs = [], []
    crop = cfg.crop
    for rec in ds.records(split):
        hr = ds.load_hr(rec)
        scene = ds.scene(rec)
        h, w = hr.shape[:2]
        for _ in range(cfg.crops_per_image):
            y = int(rng.integers(0, (h - crop) // ds.scale + 1)) * ds.scale
            x = int(rng.integers(0, (w - crop) // ds.scale + 1)) * ds.scale
            patch = hr[y:y + crop, x:x + crop]
            latents.append(vae_encode(vae, patch)[0])
            ctxs.append(text_encoder.encode(tags_in_rect(scene, y, x, crop, crop)))
    return torch.stack(latents), torch.stack(ctxs)


@torch.no_grad()
def heldout_base_loss(model: ToyUNet, z0, ctx, probes) -> float:
    """Mean loss over fixed (t, eps) probes so evaluations are comparable."""
    t_vec, eps, abar = probes
    was_training = model.training
    model.eval()
    total, n = 0.0, z0.shape[0]
    for i in range(0, n, 16):
        sl = slice(i, min(i + 16, n))
        z_t = _noised_batch(z0[sl], t_vec[sl], eps[sl], abar)
        eps_hat = model(z_t, t_vec[sl], ctx[sl])
        total += float(F.mse_loss(eps_hat, eps[sl], reduction="sum"))
    model.train(was_training)
    return total / eps.numel()


def make_probes(z0: torch.Tensor, schedule_abar: np.ndarray, T: int, seed: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x70726f62]))
    t_vec = torch.from_numpy(rng.integers(1, T + 1, size=z0.shape[0]))
    eps = torch.from_numpy(rng.standard_normal(tuple(z0.shape)).astype(np.float32))
    abar = torch.from_numpy(schedule_abar)
    return t_vec, eps, abar


def train_base(ds: ToyDataset, vae: ToyVAE, text_encoder: TextEncoderToy,
               cfg: DiffusionConfig, seed: int = 0, log=None):
    """Returns (model, history). RCA modules receive no gradient here."""
    cfg.validate()
    schedule = cfg.schedule()
    torch.manual_seed(seed)
    model = ToyUNet(cfg)

    z0, ctx = build_base_pool(ds, vae, text_encoder, cfg, seed, "train")
    zv, cv = build_base_pool(ds, vae, text_encoder, cfg, seed + 1, "val")
    probes = make_probes(zv, schedule.alphas_cumprod, schedule.T, seed)
    abar = torch.from_numpy(schedule.alphas_cumprod)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x62747261]))
    params = [p for n, p in model.named_parameters() if ".soft_attn." not in n]
    opt = torch.optim.Adam(params, lr=cfg.base_lr)

    history = {"initial": {"val_loss": heldout_base_loss(model, zv, cv, probes)},
               "steps": []}
    model.train()
    n = z0.shape[0]
    for step in range(1, cfg.base_iterations + 1):
        idx = torch.from_numpy(rng.integers(0, n, size=min(cfg.batch_size, n)))
        t_vec = torch.from_numpy(rng.integers(1, schedule.T + 1, size=len(idx)))
        eps = torch.from_numpy(rng.standard_normal(tuple(z0[idx].shape)).astype(np.float32))
        z_t = _noised_batch(z0[idx], t_vec, eps, abar)
        eps_hat = model(z_t, t_vec, ctx[idx])
        loss = F.mse_loss(eps_hat, eps)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if log is not None and (step % cfg.holdout_every == 0 or step == cfg.base_iterations):
            entry = {"step": step, "loss": loss.item(),
                     "val_loss": heldout_base_loss(model, zv, cv, probes)}
            history["steps"].append(entry)
            log(entry)
    history["final"] = {"val_loss": heldout_base_loss(model, zv, cv, probes)}
    model.eval()
    return model, history
