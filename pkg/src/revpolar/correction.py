"""Training-set polarity correction and sentence-level consistency filtering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

from .corpus import Polarity, ReviewDocument
from .naive import SentencePolarity, SentenceScorer
from .textproc import ConfigError, Token


class Fallback(str, Enum):
    KEEP_ALL = "KeepAll"
    KEEP_MAJORITY_RUNS = "KeepMajorityRuns"

    @classmethod
    def parse(cls, value: "str | Fallback") -> "Fallback":
        if isinstance(value, Fallback):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for fb in cls:
            if key == fb.value.lower():
                return fb
        raise ConfigError(f"unknown fallback policy {value!r}")


@dataclass(frozen=True)
class CorrectionConfig:
    theta: int = 2
    negation_window: int = 3
    retrain_naive_after_trainset_correction: bool = True
    fallback: Fallback = Fallback.KEEP_ALL
    trainset_correction: bool = True
    sentence_correction: bool = True

    def __post_init__(self):
        if self.theta < 1:
            raise ConfigError(f"theta must be >= 1, got {self.theta}")
        if not 1 <= self.negation_window <= 3:
            raise ConfigError(f"negation window must be in [1, 3], got {self.negation_window}")
        object.__setattr__(self, "fallback", Fallback.parse(self.fallback))


class CorrectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Run:
    start: int
    length: int
    polarity: Polarity


@dataclass
class ConsistencyResult:
    kept: frozenset[int] = frozenset()
    removed_outliers: frozenset[int] = frozenset()
    runs: list[Run] = field(default_factory=list)
    theta: int = 2
    fallback_used: bool = False
    polarities: list[SentencePolarity] = field(default_factory=list)

    def trace(self, doc_id: str) -> dict:
        return {
            "id": doc_id,
            "theta": self.theta,
            "sentences": [
                {"index": p.index, "predicted": p.predicted.value,
                 "score_pos": p.score_pos, "score_neg": p.score_neg}
                for p in self.polarities
            ],
            "runs": [[r.start, r.length, r.polarity.value] for r in self.runs],
            "kept": sorted(self.kept),
            "removed": sorted(self.removed_outliers),
            "fallback_used": self.fallback_used,
        }


# --------------------------------------------------------------------------
# Sentence-level consistency

def polarity_runs(polarities: Sequence[Polarity]) -> list[Run]:
    runs: list[Run] = []
    for i, p in enumerate(polarities):
        if runs and runs[-1].polarity is p:
            last = runs[-1]
            runs[-1] = Run(last.start, last.length + 1, p)
        else:
            runs.append(Run(i, 1, p))
    return runs


def filter_consistent(seq: Sequence[SentencePolarity | Polarity], theta: int = 2,
                      fallback: Fallback | str | None = Fallback.KEEP_ALL) -> ConsistencyResult:
    """Keep sentences in maximal same-polarity runs of at least ``theta``.

    When no run reaches ``theta`` the fallback decides: ``KeepAll`` keeps the
    whole sequence, ``KeepMajorityRuns`` keeps every run of the polarity that
    covers more sentences (Positive on a tie). ``fallback=None`` disables the
    fallback, so the result may keep nothing.
    """
    if theta < 1:
        raise ConfigError(f"theta must be >= 1, got {theta}")
    scored = [p for p in seq if isinstance(p, SentencePolarity)]
    labels = [p.predicted if isinstance(p, SentencePolarity) else Polarity.parse(p) for p in seq]
    positions = [p.index for p in scored] if len(scored) == len(labels) else list(range(len(labels)))

    runs = polarity_runs(labels)
    keep_pos = [i for r in runs if r.length >= theta for i in range(r.start, r.start + r.length)]
    used = False
    if not keep_pos and runs and fallback is not None:
        used = True
        if Fallback.parse(fallback) is Fallback.KEEP_ALL:
            keep_pos = list(range(len(labels)))
        else:
            n_pos = sum(1 for p in labels if p is Polarity.POSITIVE)
            major = Polarity.POSITIVE if 2 * n_pos >= len(labels) else Polarity.NEGATIVE
            keep_pos = [i for i, p in enumerate(labels) if p is major]
    kept = frozenset(positions[i] for i in keep_pos)
    removed = frozenset(positions) - kept
    runs = [Run(positions[r.start], r.length, r.polarity) for r in runs]
    return ConsistencyResult(kept, removed, runs, theta, used, scored)


def correct_document(doc: ReviewDocument, model: SentenceScorer, cfg: CorrectionConfig) -> ReviewDocument:
    """Drop outlier-polarity sentences; ids, label and sentence text untouched."""
    polarities = [model.score(s.tokens, s.index) for s in doc.sentences]
    result = filter_consistent(polarities, cfg.theta, cfg.fallback)
    kept = [s for s in doc.sentences if s.index in result.kept]
    return replace(doc, sentences=kept, consistency=result)


# --------------------------------------------------------------------------
# Training-set correction

class CorrectedPools(NamedTuple):
    positive: list[list[Token]]
    negative: list[list[Token]]
    moved_to_positive: int
    moved_to_negative: int

    def labelled(self) -> list[tuple[list[Token], Polarity]]:
        return ([(t, Polarity.POSITIVE) for t in self.positive]
                + [(t, Polarity.NEGATIVE) for t in self.negative])


def correct_training_set(train_sentences: Iterable[tuple[Sequence[Token], Polarity]],
                         model: SentenceScorer) -> CorrectedPools:
    """Re-pool training sentences by the naive model's verdict.

    A sentence whose prediction contradicts its document label moves to the
    pool of the predicted class; agreeing sentences stay where they are.
    """
    positive: list[list[Token]] = []
    negative: list[list[Token]] = []
    to_pos = to_neg = 0
    for tokens, label in train_sentences:
        label = Polarity.parse(label)
        predicted = model.score(tokens).predicted
        if predicted is Polarity.POSITIVE:
            positive.append(list(tokens))
            to_pos += label is Polarity.NEGATIVE
        else:
            negative.append(list(tokens))
            to_neg += label is Polarity.POSITIVE
    if not positive or not negative:
        raise CorrectionError("training-set correction left a class pool empty")
    return CorrectedPools(positive, negative, to_pos, to_neg)


def trace_line(doc: ReviewDocument) -> str:
    if doc.consistency is None:
        raise CorrectionError(f"document {doc.id} carries no correction result")
    return json.dumps(doc.consistency.trace(doc.id), sort_keys=True)
