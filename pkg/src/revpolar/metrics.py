"""Confusion counts, precision/recall/F1 and evaluation reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .corpus import Polarity


@dataclass(frozen=True)
class ConfusionCounts:
    """Counts with Positive as the positive class."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionCounts":
        """The same counts seen with Negative as the positive class."""
        return ConfusionCounts(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)

    @classmethod
    def from_pairs(cls, gold: Iterable[Polarity], predicted: Iterable[Polarity]) -> "ConfusionCounts":
        tp = fp = tn = fn = 0
        for g, p in zip(gold, predicted):
            if p is Polarity.POSITIVE:
                if g is Polarity.POSITIVE:
                    tp += 1
                else:
                    fp += 1
            elif g is Polarity.NEGATIVE:
                tn += 1
            else:
                fn += 1
        return cls(tp, fp, tn, fn)


def compute_metrics(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(precision, recall, F1); any zero denominator yields 0 for that metric."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    # 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); one division keeps the float correctly rounded
    f1 = 2 * counts.tp / (2 * counts.tp + counts.fp + counts.fn) if counts.tp else 0.0
    return precision, recall, f1


def macro_metrics(counts: ConfusionCounts) -> tuple[float, float, float, dict[str, dict[str, float]]]:
    per_class = {}
    for name, c in (("positive", counts), ("negative", counts.swapped())):
        p, r, f = compute_metrics(c)
        per_class[name] = {"precision": p, "recall": r, "f1": f}
    mean = [(per_class["positive"][k] + per_class["negative"][k]) / 2 for k in ("precision", "recall", "f1")]
    return mean[0], mean[1], mean[2], per_class


@dataclass
class EvalReport:
    model: str
    kind: str
    scheme: str
    domain: str
    corrected: bool
    baseline: bool = False
    counts: ConfusionCounts = field(default_factory=ConfusionCounts)
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    per_class: dict[str, dict[str, float]] = field(default_factory=dict)
    n_test: int = 0
    config: dict[str, Any] = field(default_factory=dict)
    error: str | None = None
    confidence: dict[str, list[float]] | None = None
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.error is None

    @classmethod
    def build(cls, model: str, kind: str, scheme: str, domain: str, corrected: bool,
              counts: ConfusionCounts, **extra) -> "EvalReport":
        p, r, f, per_class = macro_metrics(counts)
        return cls(model, kind, scheme, domain, corrected, counts=counts, precision=p, recall=r, f1=f,
                   per_class=per_class, n_test=counts.total, **extra)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model, "kind": self.kind, "scheme": self.scheme, "domain": self.domain,
            "corrected": self.corrected, "baseline": self.baseline,
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp, "tn": self.counts.tn, "fn": self.counts.fn},
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "per_class": self.per_class, "n_test": self.n_test, "config": self.config,
            "error": self.error, "confidence": self.confidence, "notes": self.notes,
        }

    def metrics_payload(self) -> dict[str, Any]:
        """The measured part of the report, without row identity."""
        d = self.to_dict()
        return {k: d[k] for k in ("counts", "precision", "recall", "f1", "per_class", "n_test", "error")}


def bootstrap_ci(gold: Sequence[Polarity], predicted: Sequence[Polarity], replicates: int = 1000,
                 level: float = 0.95, seed: int = 0) -> dict[str, list[float]]:
    """Percentile intervals for macro precision/recall/F1 over resampled documents."""
    g = np.array([x is Polarity.POSITIVE for x in gold])
    p = np.array([x is Polarity.POSITIVE for x in predicted])
    n = len(g)
    if n == 0:
        return {"precision": [0.0, 0.0], "recall": [0.0, 0.0], "f1": [0.0, 0.0]}
    rng = np.random.default_rng(seed)
    stats = np.empty((replicates, 3))
    for b in range(replicates):
        idx = rng.integers(0, n, n)
        gb, pb = g[idx], p[idx]
        counts = ConfusionCounts(int((gb & pb).sum()), int((~gb & pb).sum()),
                                 int((~gb & ~pb).sum()), int((gb & ~pb).sum()))
        stats[b] = macro_metrics(counts)[:3]
    lo, hi = (1 - level) / 2 * 100, (1 + level) / 2 * 100
    bounds = np.percentile(stats, [lo, hi], axis=0)
    return {k: [float(bounds[0, i]), float(bounds[1, i])] for i, k in enumerate(("precision", "recall", "f1"))}
