"""Prompt-conditioned toy UNet with a ControlNet-style trainable encoder copy.

Every attention block runs self-attention, then text cross-attention (TCA),
then representation cross-attention (RCA) on the soft prompt. RCA output
projections and all control bridge convs are zero-initialized, so at SR
initialization the controlled model reproduces the frozen base exactly.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import ConfigError
from .schedule import NoiseSchedule, make_schedule


@dataclass
class DiffusionConfig:
    latent_channels: int = 4
    widths: tuple = (64, 128)
    heads: int = 4
    text_dim: int = 64
    soft_dim: int = 64
    context_len: int = 16
    groups: int = 8
    T: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 2e-2
    spacing_count: int = 50
    base_lr: float = 1e-4
    base_iterations: int = 5000
    sr_lr: float = 1e-4
    sr_iterations: int = 5000
    batch_size: int = 16
    crop: int = 64
    crops_per_image: int = 4
    holdout_every: int = 100

    def validate(self) -> "DiffusionConfig":
        if len(self.widths) != 2:
            raise ConfigError("the toy UNet uses exactly 2 resolution levels")
        for w in self.widths:
            if w % self.groups or w % self.heads:
                raise ConfigError("widths must be divisible by groups and heads")
        if not 1 <= self.spacing_count <= self.T:
            raise ConfigError("need 1 <= spacing_count <= T")
        return self

    def schedule(self) -> NoiseSchedule:
        return make_schedule(self.T, self.beta_start, self.beta_end, self.spacing_count)


def timestep_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Sinusoidal embedding of integer timesteps, [B, dim]."""
    if t.dim() == 0:
        t = t[None]
    half = dim // 2
    freqs = torch.exp(-math.log(10000.0) * torch.arange(half, dtype=torch.float32) / half)
    args = t.float()[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class ResBlock(nn.Module):
    def __init__(self, c_in: int, c_out: int, time_dim: int, groups: int):
        super().__init__()
        self.norm1 = nn.GroupNorm(groups, c_in)
        self.conv1 = nn.Conv2d(c_in, c_out, 3, padding=1)
        self.time_proj = nn.Linear(time_dim, c_out)
        self.norm2 = nn.GroupNorm(groups, c_out)
        self.conv2 = nn.Conv2d(c_out, c_out, 3, padding=1)
        self.skip = nn.Conv2d(c_in, c_out, 1) if c_in != c_out else nn.Identity()

    def forward(self, x, temb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.time_proj(F.silu(temb))[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return self.skip(x) + h


class CrossAttention(nn.Module):
    """Multi-head attention; queries from image tokens, keys/values from context.

    zero_out zero-initializes the output projection, making the module an
    exact no-op inside a residual branch at initialization.
    """

    def __init__(self, query_dim: int, context_dim: int, heads: int, zero_out: bool = False):
        super().__init__()
        if query_dim % heads:
            raise ConfigError("query_dim must be divisible by heads")
        self.heads = heads
        self.head_dim = query_dim // heads
        self.to_q = nn.Linear(query_dim, query_dim, bias=False)
        self.to_k = nn.Linear(context_dim, query_dim, bias=False)
        self.to_v = nn.Linear(context_dim, query_dim, bias=False)
        self.to_out = nn.Linear(query_dim, query_dim)
        if zero_out:
            nn.init.zeros_(self.to_out.weight)
            nn.init.zeros_(self.to_out.bias)

    def forward(self, x, context):
        b, n, _ = x.shape
        m = context.shape[1]

        def split(t, length):
            return t.view(b, length, self.heads, self.head_dim).transpose(1, 2)

        q = split(self.to_q(x), n)
        k = split(self.to_k(context), m)
        v = split(self.to_v(context), m)
        attn = torch.softmax(q @ k.transpose(-2, -1) / math.sqrt(self.head_dim), dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, n, -1)
        return self.to_out(out)


class AttentionBlock(nn.Module):
    """self-attention -> TCA -> RCA, each residual; RCA skipped when no soft prompt."""

    def __init__(self, ch: int, text_dim: int, soft_dim: int, heads: int):
        super().__init__()
        self.norm_self = nn.LayerNorm(ch)
        self.self_attn = CrossAttention(ch, ch, heads)
        self.norm_text = nn.LayerNorm(ch)
        self.text_attn = CrossAttention(ch, text_dim, heads)
        self.norm_soft = nn.LayerNorm(ch)
        self.soft_attn = CrossAttention(ch, soft_dim, heads, zero_out=True)

    def forward(self, x, text_ctx, soft_ctx=None):
        b, c, h, w = x.shape
        t = x.flatten(2).transpose(1, 2)
        s = self.norm_self(t)
        t = t + self.self_attn(s, s)
        t = t + self.text_attn(self.norm_text(t), text_ctx)
        if soft_ctx is not None:
            t = t + self.soft_attn(self.norm_soft(t), soft_ctx)
        return t.transpose(1, 2).reshape(b, c, h, w)


class ToyUNet(nn.Module):
    """Two-level UNet over latents; epsilon prediction."""

    def __init__(self, cfg: DiffusionConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        w0, w1 = cfg.widths
        g, hd = cfg.groups, cfg.heads
        self.time_dim = 4 * w0
        self.time_mlp = nn.Sequential(
            nn.Linear(w0, self.time_dim), nn.SiLU(), nn.Linear(self.time_dim, self.time_dim))

        self.conv_in = nn.Conv2d(cfg.latent_channels, w0, 3, padding=1)
        self.enc_res0 = ResBlock(w0, w0, self.time_dim, g)
        self.enc_attn0 = AttentionBlock(w0, cfg.text_dim, cfg.soft_dim, hd)
        self.down = nn.Conv2d(w0, w1, 3, stride=2, padding=1)
        self.enc_res1 = ResBlock(w1, w1, self.time_dim, g)
        self.enc_attn1 = AttentionBlock(w1, cfg.text_dim, cfg.soft_dim, hd)
        self.mid = ResBlock(w1, w1, self.time_dim, g)

        self.dec_res3 = ResBlock(2 * w1, w1, self.time_dim, g)
        self.dec_attn3 = AttentionBlock(w1, cfg.text_dim, cfg.soft_dim, hd)
        self.dec_res2 = ResBlock(2 * w1, w1, self.time_dim, g)
        self.up = nn.Sequential(nn.Upsample(scale_factor=2, mode="nearest"),
                                nn.Conv2d(w1, w0, 3, padding=1))
        self.dec_res1 = ResBlock(2 * w0, w0, self.time_dim, g)
        self.dec_attn1 = AttentionBlock(w0, cfg.text_dim, cfg.soft_dim, hd)
        self.dec_res0 = ResBlock(2 * w0, w0, self.time_dim, g)
        self.out_norm = nn.GroupNorm(g, w0)
        self.out_conv = nn.Conv2d(w0, cfg.latent_channels, 3, padding=1)

    def time_embed(self, t) -> torch.Tensor:
        if not isinstance(t, torch.Tensor):
            t = torch.tensor(t, dtype=torch.long)
        emb = timestep_embedding(t, self.cfg.widths[0])
        # follow the module dtype so float64 gradient checks work
        return self.time_mlp(emb.to(self.out_conv.weight.dtype))

    def encode_features(self, z, temb, text_ctx, soft_ctx=None, hint=None):
        """Shared encoder pass; returns (skips [s0..s3], mid output)."""
        s0 = self.conv_in(z)
        if hint is not None:
            s0 = s0 + hint
        h = self.enc_res0(s0, temb)
        s1 = self.enc_attn0(h, text_ctx, soft_ctx)
        s2 = self.down(s1)
        h = self.enc_res1(s2, temb)
        s3 = self.enc_attn1(h, text_ctx, soft_ctx)
        m = self.mid(s3, temb)
        return [s0, s1, s2, s3], m

    def forward_core(self, z, temb, text_ctx, soft_ctx=None, control=None):
        skips, m = self.encode_features(z, temb, text_ctx, soft_ctx)
        if control is not None:
            ctrl_skips, ctrl_mid = control
            skips = [s + c for s, c in zip(skips, ctrl_skips)]
            m = m + ctrl_mid
        s0, s1, s2, s3 = skips
        h = self.dec_res3(torch.cat([m, s3], dim=1), temb)
        h = self.dec_attn3(h, text_ctx, soft_ctx)
        h = self.dec_res2(torch.cat([h, s2], dim=1), temb)
        h = self.up(h)
        h = self.dec_res1(torch.cat([h, s1], dim=1), temb)
        h = self.dec_attn1(h, text_ctx, soft_ctx)
        h = self.dec_res0(torch.cat([h, s0], dim=1), temb)
        return self.out_conv(F.silu(self.out_norm(h)))

    def forward(self, z_t, t, text_ctx, soft_ctx=None, control=None):
        self._check(z_t, text_ctx, soft_ctx)
        temb = self.time_embed(t)
        return self.forward_core(z_t, temb, text_ctx, soft_ctx, control)

    def _check(self, z_t, text_ctx, soft_ctx):
        if z_t.dim() != 4 or z_t.shape[1] != self.cfg.latent_channels:
            raise ValueError(f"latent must be [B, {self.cfg.latent_channels}, h, w], got {tuple(z_t.shape)}")
        if text_ctx.dim() != 3 or text_ctx.shape[-1] != self.cfg.text_dim:
            raise ValueError(f"text context must be [B, L, {self.cfg.text_dim}]")
        if soft_ctx is not None and (soft_ctx.dim() != 3 or soft_ctx.shape[-1] != self.cfg.soft_dim):
            raise ValueError(f"soft prompt must be [B, S, {self.cfg.soft_dim}]")


def _zero_conv(ch: int) -> nn.Conv2d:
    c = nn.Conv2d(ch, ch, 1)
    nn.init.zeros_(c.weight)
    nn.init.zeros_(c.bias)
    return c


class ControlBranch(nn.Module):
    """Trainable clone of the base encoder fed by an LR hint encoder.

    Outputs pass through zero-initialized 1x1 bridges, one per skip plus one
    for the mid feature.
    """

    def __init__(self, base: ToyUNet):
        super().__init__()
        cfg = base.cfg
        w0, w1 = cfg.widths
        self.conv_in = copy.deepcopy(base.conv_in)
        self.enc_res0 = copy.deepcopy(base.enc_res0)
        self.enc_attn0 = copy.deepcopy(base.enc_attn0)
        self.down = copy.deepcopy(base.down)
        self.enc_res1 = copy.deepcopy(base.enc_res1)
        self.enc_attn1 = copy.deepcopy(base.enc_attn1)
        self.mid = copy.deepcopy(base.mid)
        self.hint_encoder = nn.Sequential(
            nn.Conv2d(3, 16, 3, padding=1), nn.SiLU(),
            nn.Conv2d(16, w0, 3, padding=1))
        self.bridges = nn.ModuleList([_zero_conv(w) for w in (w0, w0, w1, w1)])
        self.bridge_mid = _zero_conv(w1)

    def forward(self, z_t, temb, text_ctx, soft_ctx, lr_image):
        hint = self.hint_encoder(lr_image)
        s0 = self.conv_in(z_t) + hint
        h = self.enc_res0(s0, temb)
        s1 = self.enc_attn0(h, text_ctx, soft_ctx)
        s2 = self.down(s1)
        h = self.enc_res1(s2, temb)
        s3 = self.enc_attn1(h, text_ctx, soft_ctx)
        m = self.mid(s3, temb)
        skips = [b(s) for b, s in zip(self.bridges, (s0, s1, s2, s3))]
        return skips, self.bridge_mid(m)


def rca_parameter_names(module: nn.Module) -> list:
    return [n for n, _ in module.named_parameters() if ".soft_attn." in n]


class ControlledUNet(nn.Module):
    """Frozen base + trainable control branch; RCA inside the base is trainable."""

    def __init__(self, base: ToyUNet):
        super().__init__()
        self.base = base
        self.control = ControlBranch(base)
        for p in self.base.parameters():
            p.requires_grad_(False)
        rca = set(rca_parameter_names(self.base))
        for n, p in self.base.named_parameters():
            if n in rca:
                p.requires_grad_(True)

    @property
    def cfg(self) -> DiffusionConfig:
        return self.base.cfg

    def frozen_state_dict(self) -> dict:
        """The contractually frozen subset: base weights minus RCA."""
        return {k: v for k, v in self.base.state_dict().items()
                if ".soft_attn." not in k}

    def trainable_parameters(self):
        for n, p in self.named_parameters():
            if p.requires_grad:
                yield p

    def forward(self, z_t, t, text_ctx, soft_ctx=None, lr_image=None):
        self.base._check(z_t, text_ctx, soft_ctx)
        temb = self.base.time_embed(t)
        control = None
        if lr_image is not None:
            if lr_image.shape[-2:] != z_t.shape[-2:]:
                raise ValueError(
                    f"LR image spatial {tuple(lr_image.shape[-2:])} must match latent {tuple(z_t.shape[-2:])}")
            control = self.control(z_t, temb, text_ctx, soft_ctx, lr_image)
        return self.base.forward_core(z_t, temb, text_ctx, soft_ctx, control)
