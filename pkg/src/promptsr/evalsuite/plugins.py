"""Metric plugin registry.

Learned IQA metrics need external pretrained networks, which this package
deliberately does not ship. Third parties can register such metrics here;
the harness will pick them up by name. Built-in reference-based metrics are
registered below as the canonical examples of the contract.

Contract: a per_image metric is called as fn(sr_image, hr_image) -> float
for each image pair; a distributional metric is called once as
fn(sr_images, hr_images) -> float over the whole evaluation set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fidelity import psnr, ssim

KINDS = ("per_image", "distributional")


@dataclass(frozen=True)
class MetricPlugin:
    name: str
    kind: str  # per_image | distributional
    fn: callable
    needs_reference: bool = True


_REGISTRY: dict = {}


def register_metric(name: str, kind: str, fn, needs_reference: bool = True,
                    replace: bool = False) -> MetricPlugin:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if name in _REGISTRY and not replace:
        raise ValueError(f"metric {name!r} already registered")
    plugin = MetricPlugin(name=name, kind=kind, fn=fn, needs_reference=needs_reference)
    _REGISTRY[name] = plugin
    return plugin


def get_metric(name: str) -> MetricPlugin:
    if name not in _REGISTRY:
        raise KeyError(f"no metric named {name!r}; registered: {sorted(_REGISTRY)}")
    return _REGISTRY[name]


def list_metrics() -> tuple:
    return tuple(sorted(_REGISTRY))


register_metric("psnr", "per_image", lambda sr, hr: psnr(sr, hr, y_channel=True))
register_metric("ssim", "per_image", lambda sr, hr: ssim(sr, hr, y_channel=True))
