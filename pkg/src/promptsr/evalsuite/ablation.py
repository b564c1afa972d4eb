"""Ablation runner: prompt-source arms plus the LRE on/off pair.

Arms share per-image sampler seeds and identical LR inputs (input-parity
contract); each arm yields one MetricsReport and the bundle is also emitted
as CSV and an aligned-text comparison table.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import replace

import numpy as np
import torch

from ..errors import ConfigError
from ..prompts import PromptBundle, extract_prompts
from ..runconfig import RunConfig, config_hash
from ..sampling import sample
from ..tagging import TagSet, teacher_encode
from .fidelity import flat_region_deviation, psnr, ssim
from .report import MetricsReport, comparison_csv, comparison_table
from .tagmetrics import average_precision, compute_op_or

ABLATION_ARMS = ("control_only", "teacher_prompts", "hard_only", "soft_only",
                 "full", "lre_on", "lre_off")

SUITES = {
    "full": ABLATION_ARMS,
    "dape": ABLATION_ARMS[:5],
    "lre": ("lre_on", "lre_off"),
}

# which tagger supplies the hard prompt actually fed to the text encoder
_PROMPT_SOURCE = {
    "control_only": None,
    "teacher_prompts": "teacher",
    "hard_only": "dape",
    "soft_only": None,
    "full": "dape",
    "lre_on": "dape",
    "lre_off": "dape",
}


def suite_arms(suite) -> tuple:
    if isinstance(suite, (tuple, list)):
        arms = tuple(suite)
    else:
        try:
            arms = SUITES[suite]
        except KeyError:
            raise ConfigError(f"unknown ablation suite {suite!r}; "
                              f"expected one of {sorted(SUITES)} or a tuple of arms")
    bad = [a for a in arms if a not in ABLATION_ARMS]
    if bad:
        raise ConfigError(f"unknown ablation arms {bad}; valid arms: {ABLATION_ARMS}")
    return arms


def _arm_bundle(arm: str, dape_bundle: PromptBundle,
                teacher_bundle: PromptBundle | None) -> PromptBundle:
    null_tags = TagSet(tags=(), scores={})
    if arm == "control_only":
        return PromptBundle(hard=null_tags, soft=None)
    if arm == "teacher_prompts":
        return teacher_bundle
    if arm == "hard_only":
        return PromptBundle(hard=dape_bundle.hard, soft=None)
    if arm == "soft_only":
        return PromptBundle(hard=null_tags, soft=dape_bundle.soft)
    return dape_bundle  # full / lre_on / lre_off


def _arm_lre(arm: str, default: bool) -> bool:
    if arm == "lre_on":
        return True
    if arm == "lre_off":
        return False
    return default


def _checksum(img: np.ndarray) -> str:
    return hashlib.sha256(img.tobytes()).hexdigest()[:16]


def run_ablation(suite, config: RunConfig, n_images: int | None = None,
                 out_subdir: str = "ablate") -> dict:
    """Execute the arms of `suite` and return {arm: MetricsReport}.

    All arms see the same LR inputs and the same per-image sampler seed;
    only the prompt bundle and the LRE switch differ. n_images=None uses
    config.eval.ablate_images; 0 means the whole split.
    """
    from ..pipeline import Workspace, load_dape, load_sr, load_teacher, load_text_encoder, load_vae

    arms = suite_arms(suite)
    ws = Workspace(config)
    ds = ws.dataset()
    sr_model = load_sr(ws)
    vae = load_vae(ws)
    dape = load_dape(ws)
    text_encoder = load_text_encoder(ws)
    teacher = load_teacher(ws) if "teacher_prompts" in arms else None
    schedule = config.diffusion.schedule()
    thr = config.dape.threshold

    records = ds.records(config.eval.split)
    n = config.eval.ablate_images if n_images is None else n_images
    if n and n > 0:
        records = records[:n]

    # shared per-image inputs, prompts, and seeds (input-parity contract)
    items = []
    for idx, rec in enumerate(records):
        lr = ds.load_lr(rec, 0)
        hr = ds.load_hr(rec)
        entry = {
            "id": rec["id"],
            "lr": lr,
            "hr": hr,
            "tags": tuple(rec["tags"]),
            "seed": config.sampler.seed + idx,
            "checksum": _checksum(lr),
            "dape_bundle": extract_prompts(dape, lr, thr),
        }
        if teacher is not None:
            entry["teacher_bundle"] = extract_prompts(teacher, lr, thr)
        items.append(entry)

    def class_scores(tagger, lr):
        _, logits = teacher_encode(tagger, lr)
        return torch.sigmoid(logits).numpy()

    out_dir = ws.root / out_subdir
    out_dir.mkdir(parents=True, exist_ok=True)
    log = ws.logger("ablate")
    t0 = time.time()
    reports: dict = {}
    parity: dict = {}
    for arm in arms:
        use_lre = _arm_lre(arm, config.sampler.use_lre)
        source = _PROMPT_SOURCE[arm]
        per_image, preds, truths, scores, tag_truth = [], [], [], [], []
        checksums = []
        for item in items:
            bundle = _arm_bundle(arm, item["dape_bundle"], item.get("teacher_bundle"))
            scfg = replace(config.sampler, use_lre=use_lre, seed=item["seed"])
            sr_img = sample(sr_model, vae, item["lr"], bundle, schedule, scfg,
                            text_encoder, scale=ds.scale)
            per_image.append({
                "id": item["id"],
                "psnr": psnr(sr_img, item["hr"], y_channel=True),
                "ssim": ssim(sr_img, item["hr"], y_channel=True),
                "flat_dev": flat_region_deviation(sr_img, item["lr"], item["hr"],
                                                  config.eval.flat_percentile),
            })
            checksums.append(item["checksum"])
            if source is not None:
                preds.append(bundle.hard.tags)
                truths.append(item["tags"])
                tagger = dape if source == "dape" else teacher
                scores.append(class_scores(tagger, item["lr"]))
                tag_truth.append([1.0 if t in item["tags"] else 0.0 for t in ds.vocab])
        if source is not None:
            op, or_, _ = compute_op_or(preds, truths, ds.vocab)
            ap = average_precision(np.array(scores), np.array(tag_truth))
        else:
            op = or_ = ap = None
        report = MetricsReport.from_entries(
            per_image,
            tagging={"op": op, "or": or_, "ap": ap},
            metadata={"arm": arm, "use_lre": use_lre, "prompt_source": source,
                      "seeds": [it["seed"] for it in items],
                      "input_checksums": checksums,
                      "config_hash": config_hash(config)},
        )
        arm_dir = out_dir / arm
        arm_dir.mkdir(parents=True, exist_ok=True)
        report.to_json(arm_dir / "report.json")
        reports[arm] = report
        parity[arm] = checksums
        log({"event": "arm_done", "arm": arm, "aggregates": report.aggregates,
             "tagging": report.tagging})

    # verify input parity across arms before declaring the bundle valid
    reference = next(iter(parity.values()))
    for arm, sums in parity.items():
        if sums != reference:
            raise RuntimeError(f"input-parity violation in arm {arm!r}")
    log({"event": "input_parity", "verified": True, "n_images": len(items)})
    log.close()

    (out_dir / "comparison.csv").write_text(comparison_csv(reports))
    (out_dir / "comparison.txt").write_text(comparison_table(reports))
    from ..manifest import write_manifest
    write_manifest(ws.root, "ablate", config_hash(config), config.seed,
                   inputs=[config.dataset_dir],
                   outputs=[str(out_dir / a / "report.json") for a in arms]
                           + [str(out_dir / "comparison.csv"),
                              str(out_dir / "comparison.txt")],
                   wall_time_s=time.time() - t0,
                   extra={"arms": list(arms), "n_images": len(items),
                          "input_parity": True})
    return reports
