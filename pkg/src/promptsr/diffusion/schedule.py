"""Linear-beta DDPM noise schedule with spaced inference steps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch


@dataclass
class NoiseSchedule:
    """Forward-process schedule. Timesteps are 1-indexed; alpha_bar(0) = 1."""

    T: int
    betas: np.ndarray  # [T] float64, 0 < beta < 1
    alphas_cumprod: np.ndarray  # [T] float64, strictly decreasing
    spaced_steps: tuple  # strictly decreasing subset of 1..T, includes T

    def validate(self) -> "NoiseSchedule":
        if self.betas.shape != (self.T,) or self.alphas_cumprod.shape != (self.T,):
            raise ValueError("betas and alphas_cumprod must have length T")
        if (self.betas <= 0).any() or (self.betas >= 1).any():
            raise ValueError("betas must lie in (0, 1)")
        if (np.diff(self.alphas_cumprod) >= 0).any():
            raise ValueError("alpha_bar must be strictly decreasing")
        steps = self.spaced_steps
        if not steps or steps[0] != self.T:
            raise ValueError("spaced_steps must start at T")
        if any(s1 <= s2 for s1, s2 in zip(steps, steps[1:])):
            raise ValueError("spaced_steps must be strictly decreasing")
        if steps[-1] < 1:
            raise ValueError("spaced_steps must stay within 1..T")
        return self

    def alpha_bar(self, t: int) -> float:
        """Cumulative product at 1-indexed t, with the t=0 convention of 1."""
        if not 0 <= t <= self.T:
            raise ValueError(f"t={t} outside [0, {self.T}]")
        return 1.0 if t == 0 else float(self.alphas_cumprod[t - 1])

    def to_dict(self) -> dict:
        return {"T": self.T, "betas": self.betas.tolist(),
                "spaced_steps": list(self.spaced_steps)}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSchedule":
        betas = np.asarray(d["betas"], dtype=np.float64)
        return cls(T=int(d["T"]), betas=betas,
                   alphas_cumprod=np.cumprod(1.0 - betas),
                   spaced_steps=tuple(int(s) for s in d["spaced_steps"])).validate()


def spaced_subset(T: int, count: int) -> tuple:
    """Uniform-stride descending subset of {1..T} of the given size, starting at T."""
    if not 1 <= count <= T:
        raise ValueError(f"need 1 <= count <= T, got count={count}, T={T}")
    stride = T // count
    return tuple(T - i * stride for i in range(count))


def make_schedule(T: int, beta_start: float = 1e-4, beta_end: float = 2e-2,
                  spacing_count: int = 50) -> NoiseSchedule:
    """Linear beta ramp from beta_start to beta_end over T steps."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError(f"need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]")
    betas = np.linspace(beta_start, beta_end, T, dtype=np.float64)
    return NoiseSchedule(
        T=T,
        betas=betas,
        alphas_cumprod=np.cumprod(1.0 - betas),
        spaced_steps=spaced_subset(T, spacing_count),
    ).validate()


def add_noise(z0: torch.Tensor, eps: torch.Tensor, t: int,
              schedule: NoiseSchedule) -> torch.Tensor:
    """Forward diffusion: sqrt(abar_t) * z0 + sqrt(1 - abar_t) * eps.

    t = 0 is allowed and returns z0 exactly (the alpha_bar(0) = 1 convention).
    """
    if z0.shape != eps.shape:
        raise ValueError(f"shape mismatch: {tuple(z0.shape)} vs {tuple(eps.shape)}")
    abar = schedule.alpha_bar(t)
    c_signal = float(np.sqrt(abar))
    c_noise = float(np.sqrt(1.0 - abar))
    return z0 * c_signal + eps * c_noise
