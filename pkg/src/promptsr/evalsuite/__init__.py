"""Evaluation suite: fidelity metrics, tag metrics, reports, plugins, ablation."""

from .fidelity import (
    PSNR_CAP_DB,
    SSIM_SIGMA,
    SSIM_WINDOW,
    flat_region_deviation,
    flat_region_mask,
    psnr,
    ssim,
)
from .plugins import MetricPlugin, get_metric, list_metrics, register_metric
from .report import AGG_TOL, MetricsReport, comparison_csv, comparison_table
from .tagmetrics import TagConfusionCounts, average_precision, compute_op_or, jaccard

__all__ = [
    "PSNR_CAP_DB",
    "SSIM_WINDOW",
    "SSIM_SIGMA",
    "AGG_TOL",
    "psnr",
    "ssim",
    "flat_region_mask",
    "flat_region_deviation",
    "TagConfusionCounts",
    "compute_op_or",
    "jaccard",
    "average_precision",
    "MetricsReport",
    "comparison_csv",
    "comparison_table",
    "MetricPlugin",
    "register_metric",
    "get_metric",
    "list_metrics",
    "ABLATION_ARMS",
    "run_ablation",
]


def __getattr__(name):
    # ablation imports pipeline pieces lazily to avoid a cycle at package import
    if name in ("ABLATION_ARMS", "run_ablation"):
        from . import ablation
        return getattr(ablation, name)
    raise AttributeError(name)
