"""Multi-label tagging metrics: overall precision/recall and average precision.

Undefined metrics (empty denominators, no positives) are returned as None
with a warning; callers must not coerce them to 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import VocabularyError


@dataclass
class TagConfusionCounts:
    """Per-class counts: n_p predicted, n_t correctly predicted, n_g ground truth."""

    vocab: tuple
    n_p: np.ndarray  # [C] int64
    n_t: np.ndarray
    n_g: np.ndarray

    def validate(self) -> "TagConfusionCounts":
        c = len(self.vocab)
        for arr in (self.n_p, self.n_t, self.n_g):
            if arr.shape != (c,):
                raise ValueError(f"count arrays must have shape ({c},)")
            if (arr < 0).any():
                raise ValueError("counts must be non-negative")
        if (self.n_t > np.minimum(self.n_p, self.n_g)).any():
            raise ValueError("n_t must not exceed min(n_p, n_g)")
        return self


def _check_tags(tag_sets, vocab, what: str):
    known = set(vocab)
    for i, tags in enumerate(tag_sets):
        for t in tags:
            if t not in known:
                raise VocabularyError(f"{what}[{i}] contains unknown tag {t!r}")


def compute_op_or(predictions, truths, vocab):
    """Overall precision and recall over per-class confusion counts.

    OP = sum_i n_t_i / sum_i n_p_i and OR = sum_i n_t_i / sum_i n_g_i.
    A zero denominator yields None for that metric.
    """
    if len(predictions) != len(truths):
        raise ValueError(f"{len(predictions)} predictions vs {len(truths)} truths")
    vocab = tuple(vocab)
    _check_tags(predictions, vocab, "predictions")
    _check_tags(truths, vocab, "truths")
    index = {t: i for i, t in enumerate(vocab)}
    c = len(vocab)
    n_p = np.zeros(c, dtype=np.int64)
    n_t = np.zeros(c, dtype=np.int64)
    n_g = np.zeros(c, dtype=np.int64)
    for pred, true in zip(predictions, truths):
        pred, true = set(pred), set(true)
        for t in pred:
            n_p[index[t]] += 1
        for t in true:
            n_g[index[t]] += 1
        for t in pred & true:
            n_t[index[t]] += 1
    counts = TagConfusionCounts(vocab=vocab, n_p=n_p, n_t=n_t, n_g=n_g).validate()
    op = None
    or_ = None
    if n_p.sum() > 0:
        op = float(n_t.sum() / n_p.sum())
    else:
        warnings.warn("OP undefined: no predictions in any class", stacklevel=2)
    if n_g.sum() > 0:
        or_ = float(n_t.sum() / n_g.sum())
    else:
        warnings.warn("OR undefined: no ground-truth positives", stacklevel=2)
    return op, or_, counts


def _binary_ap(scores: np.ndarray, labels: np.ndarray) -> float:
    """All-points average precision for one class.

    AP = sum_k (R_k - R_{k-1}) * P_k over distinct score thresholds in
    descending order, with P and R computed on everything at or above the
    threshold. Ties share a threshold.
    """
    order = np.argsort(-scores, kind="stable")
    scores = scores[order]
    labels = labels[order]
    n_pos = int(labels.sum())
    tp = np.cumsum(labels)
    ranks = np.arange(1, len(scores) + 1)
    # keep only the last entry of each tied-score group
    last_of_group = np.ones(len(scores), dtype=bool)
    last_of_group[:-1] = scores[:-1] != scores[1:]
    tp = tp[last_of_group].astype(np.float64)
    ranks = ranks[last_of_group].astype(np.float64)
    precision = tp / ranks
    recall = tp / n_pos
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def jaccard(pred, truth) -> float:
    """Tag-set overlap |pred & truth| / |pred | truth|; 1.0 when both empty."""
    pred, truth = set(pred), set(truth)
    union = pred | truth
    if not union:
        return 1.0
    return len(pred & truth) / len(union)


def average_precision(scores, truths) -> float | None:
    """Macro AP over classes with at least one positive; None if no class has any.

    scores: [N, C] per-image per-class probabilities in [0, 1].
    truths: [N, C] multi-hot ground truth.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths)
    if scores.shape != truths.shape or scores.ndim != 2:
        raise ValueError(f"scores {scores.shape} and truths {truths.shape} must be equal 2-d shapes")
    if scores.min() < 0.0 or scores.max() > 1.0:
        raise ValueError("scores must lie in [0, 1]")
    aps = []
    for c in range(scores.shape[1]):
        labels = (truths[:, c] > 0.5).astype(np.int64)
        if labels.sum() == 0:
            continue
        aps.append(_binary_ap(scores[:, c], labels))
    if not aps:
        warnings.warn("AP undefined: no positives in any class", stacklevel=2)
        return None
    return float(np.mean(aps))
