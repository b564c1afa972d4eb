"""Stage two: train control branch, hint encoder, and RCA on degraded pairs.

The base UNet (minus RCA), VAE, text encoder, and DAPE stay frozen; the
freeze contract is checksum-verified by the caller and the test suite.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..dataset import ToyDataset
from ..prompts import extract_prompts
from ..tagging import ToyTagger
from .textenc import TextEncoderToy
from .train_base import _noised_batch
from .unet import ControlledUNet, DiffusionConfig, ToyUNet
from .vae import ToyVAE, vae_encode


def build_sr_pool(ds: ToyDataset, vae: ToyVAE, dape: ToyTagger,
                  text_encoder: TextEncoderToy, cfg: DiffusionConfig,
                  threshold: float, seed: int, split: str):
    """Aligned (z0, text ctx, soft prompt, lr pixels) stacks from HR/LR crops.

    HR crops are scale-aligned so the LR crop is exact; prompts come from
    DAPE on the LR crop, as at inference time.
    """
    split_tag = int.from_bytes(split.encode()[:4].ljust(4, b"\0"), "big")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x73727472, split_tag]))
    crop, s = cfg.crop, ds.scale
    latents, ctxs, softs, lrs = [], [], [], []
    for rec in ds.records(split):
        hr = ds.load_hr(rec)
        h, w = hr.shape[:2]
        for v in range(ds.n_variants(rec)):
            lr = ds.load_lr(rec, v)
            for _ in range(cfg.crops_per_image):
                y = int(rng.integers(0, (h - crop) // s + 1)) * s
                x = int(rng.integers(0, (w - crop) // s + 1)) * s
                hr_patch = hr[y:y + crop, x:x + crop]
                lr_patch = lr[y // s:(y + crop) // s, x // s:(x + crop) // s]
                bundle = extract_prompts(dape, lr_patch, threshold)
                latents.append(vae_encode(vae, hr_patch)[0])
                ctxs.append(text_encoder.encode(bundle.hard))
                softs.append(bundle.soft)
                lrs.append(torch.from_numpy(
                    np.transpose(lr_patch, (2, 0, 1)).astype(np.float32)))
    return (torch.stack(latents), torch.stack(ctxs),
            torch.stack(softs), torch.stack(lrs))


@torch.no_grad()
def heldout_sr_loss(model: ControlledUNet, pool, probes) -> float:
    z0, ctx, soft, lr = pool
    t_vec, eps, abar = probes
    was_training = model.training
    model.eval()
    total, n = 0.0, z0.shape[0]
    for i in range(0, n, 16):
        sl = slice(i, min(i + 16, n))
        z_t = _noised_batch(z0[sl], t_vec[sl], eps[sl], abar)
        eps_hat = model(z_t, t_vec[sl], ctx[sl], soft[sl], lr[sl])
        total += float(F.mse_loss(eps_hat, eps[sl], reduction="sum"))
    model.train(was_training)
    return total / eps.numel()


def train_sr(base: ToyUNet, vae: ToyVAE, dape: ToyTagger,
             text_encoder: TextEncoderToy, ds: ToyDataset, cfg: DiffusionConfig,
             threshold: float = 0.5, seed: int = 0, log=None):
    """Returns (ControlledUNet, history)."""
    cfg.validate()
    schedule = cfg.schedule()
    torch.manual_seed(seed)
    model = ControlledUNet(base)

    pool = build_sr_pool(ds, vae, dape, text_encoder, cfg, threshold, seed, "train")
    val_pool = build_sr_pool(ds, vae, dape, text_encoder, cfg, threshold, seed + 1, "val")
    from .train_base import make_probes
    probes = make_probes(val_pool[0], schedule.alphas_cumprod, schedule.T, seed)
    abar = torch.from_numpy(schedule.alphas_cumprod)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x73727374]))
    opt = torch.optim.Adam(list(model.trainable_parameters()), lr=cfg.sr_lr)

    z0, ctx, soft, lr = pool
    history = {"initial": {"val_loss": heldout_sr_loss(model, val_pool, probes)},
               "steps": []}
    model.train()
    n = z0.shape[0]
    for step in range(1, cfg.sr_iterations + 1):
        idx = torch.from_numpy(rng.integers(0, n, size=min(cfg.batch_size, n)))
        t_vec = torch.from_numpy(rng.integers(1, schedule.T + 1, size=len(idx)))
        eps = torch.from_numpy(rng.standard_normal(tuple(z0[idx].shape)).astype(np.float32))
        z_t = _noised_batch(z0[idx], t_vec, eps, abar)
        eps_hat = model(z_t, t_vec, ctx[idx], soft[idx], lr[idx])
        loss = F.mse_loss(eps_hat, eps)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if log is not None and (step % cfg.holdout_every == 0 or step == cfg.sr_iterations):
            entry = {"step": step, "loss": loss.item(),
                     "val_loss": heldout_sr_loss(model, val_pool, probes)}
            history["steps"].append(entry)
            log(entry)
    history["final"] = {"val_loss": heldout_sr_loss(model, val_pool, probes)}
    model.eval()
    return model, history
