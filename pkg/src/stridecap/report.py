"""Mean/std tables over replicate (per-seed) metric reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .core import StrideCapError, ValidationError
from .metrics.evaluate import COLUMNS, flatten_scores

LABELS = {key: label for key, label, _ in COLUMNS}
ORDER = [key for key, _, _ in COLUMNS]
FORMATS = ("json", "csv", "markdown")


class UsageError(StrideCapError):
    pass


@dataclass(frozen=True)
class RunRecord:
    seed: int
    report: dict
    config_fingerprint: str
    timestamp: str = ""

    @classmethod
    def from_report(cls, report: dict, timestamp: str = "") -> "RunRecord":
        return cls(seed=int(report.get("seed", 0)), report=report,
                   config_fingerprint=str(report.get("config_fingerprint", "")),
                   timestamp=timestamp or str(report.get("created_at", "")))

    @classmethod
    def load(cls, path) -> "RunRecord":
        path = Path(path)
        report = json.loads(path.read_text(encoding="utf-8"))
        ts = report.get("created_at") or str(os.path.getmtime(path))
        return cls.from_report(report, ts)

    def corpus_values(self) -> dict:
        return flatten_scores(self.report.get("corpus", {}))


@dataclass(frozen=True)
class MetricStat:
    mean: float
    std: float
    n_seeds: int

    def __post_init__(self):
        if self.n_seeds < 1 or self.std < 0:
            raise ValidationError(f"invalid metric stat {self}")

    def cell(self, digits: int = 2) -> str:
        return f"{self.mean:.{digits}f} ({self.std:.{digits}f})"


@dataclass(frozen=True)
class AggregateTable:
    stats: dict  # column key -> MetricStat, in canonical column order
    config_fingerprint: str = ""
    ddof: int = 1

    def columns(self) -> list:
        return [k for k in ORDER if k in self.stats]


def mean_std(values: Sequence[float], ddof: int = 1) -> tuple:
    n = len(values)
    mean = math.fsum(values) / n
    if n - ddof <= 0:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - ddof)
    return mean, math.sqrt(var)


def aggregate_runs(records: Sequence[RunRecord], population: bool = False, force: bool = False,
                   scale: Optional[dict] = None) -> AggregateTable:
    """Per-metric mean and standard deviation of the corpus scores across records.

    Sample standard deviation (n - 1) unless ``population``. ``scale`` multiplies
    selected columns before aggregation (e.g. ``{"bleu4": 100}`` for percent tables).
    Records must share a config fingerprint unless ``force``.
    """
    if not records:
        raise ValidationError("aggregate_runs needs at least one record")
    fps = sorted({r.config_fingerprint for r in records})
    if len(fps) > 1 and not force:
        raise ValidationError(f"records have mixed config fingerprints: {fps}")
    ddof = 0 if population else 1
    scale = scale or {}
    # sort so the result does not depend on record order
    ordered = sorted(records, key=lambda r: (r.seed, r.timestamp))
    stats = {}
    for key in ORDER:
        vals = [r.corpus_values().get(key) for r in ordered]
        vals = sorted(v * scale.get(key, 1.0) for v in vals if v is not None)
        if vals:
            mean, std = mean_std(vals, ddof)
            stats[key] = MetricStat(mean, std, len(vals))
    return AggregateTable(stats=stats, config_fingerprint=fps[0] if len(fps) == 1 else "mixed",
                          ddof=ddof)


def table_to_dict(table: AggregateTable) -> dict:
    return {
        "config_fingerprint": table.config_fingerprint,
        "ddof": table.ddof,
        "metrics": {k: {"label": LABELS[k], "mean": s.mean, "std": s.std, "n_seeds": s.n_seeds}
                    for k, s in ((k, table.stats[k]) for k in table.columns())},
    }


def table_from_json(text: str) -> AggregateTable:
    doc = json.loads(text)
    stats = {k: MetricStat(float(v["mean"]), float(v["std"]), int(v["n_seeds"]))
             for k, v in doc["metrics"].items()}
    return AggregateTable(stats={k: stats[k] for k in ORDER if k in stats},
                          config_fingerprint=doc.get("config_fingerprint", ""),
                          ddof=int(doc.get("ddof", 1)))


def emit_table(table: AggregateTable, format: str, digits: int = 2) -> str:
    if format not in FORMATS:
        raise UsageError(f"unknown table format {format!r}; choose from {FORMATS}")
    cols = table.columns()
    if format == "json":
        return json.dumps(table_to_dict(table), indent=2) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scope", "n_seeds"] + [f"{k}_{part}" for k in cols for part in ("mean", "std")])
        n = max((table.stats[k].n_seeds for k in cols), default=0)
        w.writerow(["corpus", n] + [repr(getattr(table.stats[k], part))
                                    for k in cols for part in ("mean", "std")])
        return buf.getvalue()
    header = "| " + " | ".join(LABELS[k] for k in cols) + " |"
    rule = "|" + "|".join("---" for _ in cols) + "|"
    row = "| " + " | ".join(table.stats[k].cell(digits) for k in cols) + " |"
    return "\n".join([header, rule, row]) + "\n"
