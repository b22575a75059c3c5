"""Count-based sentence classifier scored by joint log probability.

For a sentence S and class C the score is ``log2 P(S|C) + log2 P(C)``, where
P(S|C) is a multinomial over unigram features with additive smoothing and
P(C) is the class prior over training sentences. The predicted class is the
argmax of the two scores; ties go to Positive. Scores closer than
``TIE_TOLERANCE`` count as tied, so that mathematically equal scores reached
through different summation orders still resolve by the tie rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .corpus import Polarity
from .textproc import FeatureScheme, Token, Vocabulary

CLASSES = (Polarity.POSITIVE, Polarity.NEGATIVE)
TIE_TOLERANCE = 1e-9


class NaiveModelError(ValueError):
    pass


@dataclass(frozen=True)
class SentencePolarity:
    index: int
    predicted: Polarity
    score_pos: float
    score_neg: float


class SentenceScorer(Protocol):
    """Anything the correction stages can use as a sentence classifier."""

    def score(self, tokens: Sequence[Token], index: int = 0) -> SentencePolarity: ...


class NaiveSentenceModel:
    def __init__(self, vocab: Vocabulary, counts: dict[Polarity, np.ndarray],
                 priors: dict[Polarity, float], alpha: float = 1.0):
        if alpha <= 0:
            raise NaiveModelError(f"smoothing alpha must be positive, got {alpha}")
        self.vocab = vocab
        self.alpha = float(alpha)
        self.counts = {c: np.asarray(counts[c], dtype=np.float64) for c in CLASSES}
        self.priors = {c: float(priors[c]) for c in CLASSES}
        self.mass = {c: float(self.counts[c].sum()) for c in CLASSES}
        self._log_prior = {c: np.log2(self.priors[c]) for c in CLASSES}
        self._log_cond = {c: np.log2(self.conditional(c)) for c in CLASSES}

    def conditional(self, cls: Polarity) -> np.ndarray:
        """Smoothed P(term | cls) over the whole vocabulary."""
        denom = self.mass[cls] + self.alpha * self.vocab.size
        return (self.counts[cls] + self.alpha) / denom

    def term_indices(self, tokens: Sequence[Token]) -> list[int]:
        index = self.vocab.index
        return [index[t.feature] for t in tokens if t.feature in index]

    def score(self, tokens: Sequence[Token], index: int = 0) -> SentencePolarity:
        idx = self.term_indices(tokens)
        pos = float(self._log_prior[Polarity.POSITIVE] + self._log_cond[Polarity.POSITIVE][idx].sum())
        neg = float(self._log_prior[Polarity.NEGATIVE] + self._log_cond[Polarity.NEGATIVE][idx].sum())
        predicted = Polarity.POSITIVE if pos >= neg - TIE_TOLERANCE else Polarity.NEGATIVE
        return SentencePolarity(index, predicted, pos, neg)

    # ------------------------------------------------------------------
    # Serialization

    def to_lines(self) -> list[str]:
        lines = [f"naive v1 α={self.alpha!r} |V|={self.vocab.size}"]
        for c in CLASSES:
            lines.append(f"prior {c.value} {self.priors[c]!r}")
        for c in CLASSES:
            nz = np.flatnonzero(self.counts[c])
            row = " ".join(f"{i}:{float(self.counts[c][i])!r}" for i in nz)
            lines.append(f"counts {c.value} {row}".rstrip())
        lines.extend(self.vocab.to_lines())
        return lines

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "NaiveSentenceModel":
        head = lines[0].split()
        if len(head) != 4 or head[:2] != ["naive", "v1"]:
            raise NaiveModelError(f"not a v1 naive model header: {lines[0]!r}")
        alpha = float(head[2].split("=", 1)[1])
        size = int(head[3].split("=", 1)[1])
        priors, rows = {}, {}
        for line in lines[1:5]:
            kind, name, *rest = line.split(" ")
            c = Polarity.parse(name)
            if kind == "prior":
                priors[c] = float(rest[0])
            elif kind == "counts":
                row = np.zeros(size)
                for cell in rest:
                    i, v = cell.split(":")
                    row[int(i)] = float(v)
                rows[c] = row
            else:
                raise NaiveModelError(f"unexpected line {line!r}")
        vocab = Vocabulary.from_lines(lines[5:])
        if vocab.size != size:
            raise NaiveModelError("vocabulary size does not match model header")
        return cls(vocab, rows, priors, alpha)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NaiveSentenceModel":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def fit_naive(sentences: Iterable[tuple[Sequence[Token], Polarity]], vocab: Vocabulary,
              alpha: float = 1.0) -> NaiveSentenceModel:
    if vocab.scheme is not FeatureScheme.UNIGRAM and vocab.scheme is not FeatureScheme.BAG_OF_WORDS:
        raise NaiveModelError("the naive model needs a unigram vocabulary")
    if alpha <= 0:
        raise NaiveModelError(f"smoothing alpha must be positive, got {alpha}")
    counts = {c: np.zeros(vocab.size) for c in CLASSES}
    n_sent = {c: 0 for c in CLASSES}
    index = vocab.index
    for tokens, label in sentences:
        label = Polarity.parse(label)
        n_sent[label] += 1
        idx = [index[t.feature] for t in tokens if t.feature in index]
        np.add.at(counts[label], idx, 1.0)
    total = sum(n_sent.values())
    for c in CLASSES:
        if n_sent[c] == 0:
            raise NaiveModelError(f"no {c.value} sentences; the model is undefined")
    priors = {c: n_sent[c] / total for c in CLASSES}
    return NaiveSentenceModel(vocab, counts, priors, alpha)


def score_sentence(model: SentenceScorer, tokens: Sequence[Token], index: int = 0) -> SentencePolarity:
    return model.score(tokens, index)
