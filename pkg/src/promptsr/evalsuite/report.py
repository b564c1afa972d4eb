"""Metrics report container plus CSV / aligned-text comparison tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

AGG_TOL = 1e-9


@dataclass
class MetricsReport:
    """Per-image fidelity entries, their aggregates, tagging metrics, metadata.

    Aggregates must equal the mean of per-image values; validate() enforces
    it to 1e-9. Undefined metrics stay None end to end.
    """

    per_image: list = field(default_factory=list)  # dicts: id, psnr, ssim, ...
    aggregates: dict = field(default_factory=dict)  # metric -> mean
    tagging: dict = field(default_factory=dict)  # op / or / ap, possibly None
    metadata: dict = field(default_factory=dict)  # config hash, seeds, checkpoints

    def validate(self) -> "MetricsReport":
        for metric, agg in self.aggregates.items():
            vals = [e[metric] for e in self.per_image if e.get(metric) is not None]
            if not vals:
                continue
            mean = sum(vals) / len(vals)
            if agg is None or abs(mean - agg) > AGG_TOL:
                raise ValueError(f"aggregate {metric}={agg} != per-image mean {mean}")
        return self

    @classmethod
    def from_entries(cls, per_image: list, tagging=None, metadata=None) -> "MetricsReport":
        metrics = set()
        for e in per_image:
            # None-valued keys still count as metrics so "undefined" stays visible
            metrics |= {k for k, v in e.items()
                        if k != "id" and (v is None or isinstance(v, (int, float)))}
        aggregates = {}
        for m in sorted(metrics):
            vals = [e[m] for e in per_image if e.get(m) is not None]
            aggregates[m] = sum(vals) / len(vals) if vals else None
        return cls(per_image=per_image, aggregates=aggregates,
                   tagging=dict(tagging or {}), metadata=dict(metadata or {})).validate()

    def to_json(self, path=None) -> str:
        payload = {
            "per_image": self.per_image,
            "aggregates": self.aggregates,
            "tagging": self.tagging,
            "metadata": self.metadata,
        }
        text = json.dumps(payload, indent=1, sort_keys=True)
        if path is not None:
            with open(path, "w") as f:
                f.write(text)
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "MetricsReport":
        text = text_or_path
        if "\n" not in str(text_or_path) and str(text_or_path).endswith(".json"):
            with open(text_or_path) as f:
                text = f.read()
        d = json.loads(text)
        return cls(per_image=d["per_image"], aggregates=d["aggregates"],
                   tagging=d.get("tagging", {}), metadata=d.get("metadata", {})).validate()


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _collect_rows(reports: dict) -> list:
    rows = []
    for rep in reports.values():
        for m in rep.aggregates:
            if m not in rows:
                rows.append(m)
        for m in rep.tagging:
            if m not in rows:
                rows.append(m)
    return rows


def _cell(rep: MetricsReport, metric: str):
    if metric in rep.aggregates:
        return rep.aggregates[metric]
    return rep.tagging.get(metric)


def comparison_csv(reports: dict) -> str:
    """Rows = metrics, columns = arms (insertion order of the reports dict)."""
    arms = list(reports.keys())
    lines = ["metric," + ",".join(arms)]
    for m in _collect_rows(reports):
        lines.append(m + "," + ",".join(_fmt(_cell(reports[a], m)) for a in arms))
    return "\n".join(lines) + "\n"


def comparison_table(reports: dict) -> str:
    """Aligned-text layout of the same comparison."""
    arms = list(reports.keys())
    rows = _collect_rows(reports)
    cells = [["metric"] + arms]
    for m in rows:
        cells.append([m] + [_fmt(_cell(reports[a], m)) for a in arms])
    widths = [max(len(r[i]) for r in cells) for i in range(len(arms) + 1)]
    lines = []
    for j, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
