"""On-disk toy dataset: HR scenes, degraded LR variants, tag manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .degrade import DegradationConfig, sample_recipe, replay_recipe
from .errors import ConfigError, DegradationError
from .images import load_image, save_image
from .toydata import VOCAB, SceneSpec, render_scene, sample_scene

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

_SPLIT_TAGS = {"train": 1, "val": 2, "bench": 3}


@dataclass
class DataConfig:
    """Geometry and sizing of the generated dataset."""

    n_train: int = 48
    n_val: int = 12
    n_bench: int = 64
    hr_size: int = 256
    bench_hr_size: int = 64
    scale: int = 4
    lr_variants: int = 2
    min_shapes: int = 1
    max_shapes: int = 3

    def validate(self) -> "DataConfig":
        if min(self.n_train, self.n_val, self.n_bench) < 1:
            raise ConfigError("all split sizes must be >= 1")
        for s in (self.hr_size, self.bench_hr_size):
            if s % self.scale != 0:
                raise ConfigError(f"HR size {s} must be divisible by scale {self.scale}")
        if self.lr_variants < 1:
            raise ConfigError("lr_variants must be >= 1")
        if not 1 <= self.min_shapes <= self.max_shapes:
            raise ConfigError("need 1 <= min_shapes <= max_shapes")
        return self


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _make_lr(hr, deg_cfg, base_seed):
    """Sample-and-apply with retry: tiny images can push a stage below the
    minimum side, in which case the next derived seed is tried. The stored
    seed is the one that succeeded, so replay needs no retry logic."""
    for attempt in range(64):
        seed = _derive_seed(base_seed, attempt)
        try:
            recipe = sample_recipe(deg_cfg, seed)
            return replay_recipe(hr, recipe), seed
        except DegradationError:
            continue
    raise DegradationError("could not sample a feasible recipe in 64 attempts")


def build_dataset(out_dir, data_cfg: DataConfig, deg_cfg: DegradationConfig,
                  seed: int) -> dict:
    """Generate and write the dataset; returns the manifest dict.

    Layout: hr/<id>.png, lr/<id>_v<k>.png, manifest.json. The manifest
    stores full scene geometry and per-variant recipe seeds, so every
    artifact is re-derivable from (manifest, degradation config).
    """
    data_cfg.validate()
    deg_cfg.validate()
    out = Path(out_dir)
    (out / "hr").mkdir(parents=True, exist_ok=True)
    (out / "lr").mkdir(parents=True, exist_ok=True)

    split_plan = [
        ("train", data_cfg.n_train, data_cfg.hr_size, data_cfg.lr_variants),
        ("val", data_cfg.n_val, data_cfg.hr_size, data_cfg.lr_variants),
        ("bench", data_cfg.n_bench, data_cfg.bench_hr_size, 1),
    ]
    splits = {}
    for split, count, size, variants in split_plan:
        records = []
        for i in range(count):
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, _SPLIT_TAGS[split], i]))
            scene = sample_scene(rng, size=size,
                                 n_shapes_range=(data_cfg.min_shapes, data_cfg.max_shapes))
            # quantize to 8 bits before degrading so (hr.png, seed) replays
            # lr.png exactly: the stored files are self-consistent
            hr = (render_scene(scene) * 255.0).round().astype(np.float32) / 255.0
            img_id = f"{split}_{i:05d}"
            hr_rel = f"hr/{img_id}.png"
            save_image(hr, out / hr_rel)
            lr_entries = []
            for v in range(variants):
                lr, lr_seed = _make_lr(hr, deg_cfg, _derive_seed(seed, _SPLIT_TAGS[split], i, v))
                lr_rel = f"lr/{img_id}_v{v}.png"
                save_image(lr, out / lr_rel)
                lr_entries.append({"path": lr_rel, "seed": lr_seed})
            records.append({
                "id": img_id,
                "hr": hr_rel,
                "tags": list(scene.tags()),
                "scene": scene.to_dict(),
                "lr": lr_entries,
            })
        splits[split] = records

    manifest = {
        "version": MANIFEST_VERSION,
        "vocab": list(VOCAB),
        "seed": seed,
        "scale": data_cfg.scale,
        "hr_size": data_cfg.hr_size,
        "bench_hr_size": data_cfg.bench_hr_size,
        "degradation": vars(deg_cfg).copy(),
        "splits": splits,
    }
    manifest_json = dict(manifest)
    manifest_json["degradation"] = {k: list(v) if isinstance(v, tuple) else v
                                    for k, v in manifest_json["degradation"].items()}
    with open(out / MANIFEST_NAME, "w") as f:
        json.dump(manifest_json, f, indent=1)
    return manifest


class ToyDataset:
    """Loader over a built dataset directory."""

    def __init__(self, root):
        self.root = Path(root)
        path = self.root / MANIFEST_NAME
        if not path.exists():
            raise ConfigError(f"no {MANIFEST_NAME} under {self.root}")
        with open(path) as f:
            self.manifest = json.load(f)
        if self.manifest.get("version") != MANIFEST_VERSION:
            raise ConfigError(f"unsupported manifest version {self.manifest.get('version')}")
        self.vocab = tuple(self.manifest["vocab"])
        self.scale = int(self.manifest["scale"])

    def records(self, split: str):
        if split not in self.manifest["splits"]:
            raise ConfigError(f"unknown split {split!r}")
        return self.manifest["splits"][split]

    def load_hr(self, record) -> np.ndarray:
        return load_image(self.root / record["hr"])

    def load_lr(self, record, variant: int = 0) -> np.ndarray:
        return load_image(self.root / record["lr"][variant]["path"])

    def scene(self, record) -> SceneSpec:
        return SceneSpec.from_dict(record["scene"])

    def n_variants(self, record) -> int:
        return len(record["lr"])
