"""Tokenization, negation tagging, vocabularies and sparse feature vectors."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

NEGATION_WORDS = frozenset({"not", "n't", "no", "never", "cannot", "neither", "nor", "without"})
CLAUSE_PUNCT = frozenset({",", ";", ":", ".", "!", "?"})
NEGATED_PREFIX = "NOT_"
BIGRAM_JOIN = "_"


class ConfigError(ValueError):
    pass


class FeatureScheme(str, Enum):
    UNIGRAM = "Unigram"
    BIGRAM = "Bigram"
    BAG_OF_WORDS = "BOWS"

    @classmethod
    def parse(cls, value: "str | FeatureScheme") -> "FeatureScheme":
        if isinstance(value, FeatureScheme):
            return value
        key = str(value).strip().lower()
        for scheme in cls:
            if key in (scheme.value.lower(), scheme.name.lower()):
                return scheme
        if key in ("bow", "bagofwords", "bag-of-words"):
            return cls.BAG_OF_WORDS
        raise ConfigError(f"unknown feature scheme {value!r}")


@dataclass(frozen=True)
class Token:
    surface: str
    negated: bool = False

    @property
    def feature(self) -> str:
        return NEGATED_PREFIX + self.surface if self.negated else self.surface

    @property
    def is_punct(self) -> bool:
        return self.surface in CLAUSE_PUNCT


# words: letter/digit runs with internal apostrophes; clause punctuation kept separately
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*|[,;:.!?]")
_NT_RE = re.compile(r"^(.+)n't$")


def tokenize(text: str, keep_punct: bool = False) -> list[Token]:
    text = text.lower().replace("’", "'")
    out = []
    for m in _TOKEN_RE.finditer(text):
        word = m.group()
        if word in CLAUSE_PUNCT:
            if keep_punct:
                out.append(Token(word))
            continue
        nt = _NT_RE.match(word)
        if nt:
            out.append(Token(nt.group(1)))
            out.append(Token("n't"))
        else:
            out.append(Token(word))
    return out


def tag_negation(tokens: Sequence[Token], window: int = 3) -> list[Token]:
    """Mark up to ``window`` tokens after each negation word as negated.

    A window stops early at the next negation word or clause punctuation.
    """
    if not 1 <= window <= 3:
        raise ConfigError(f"negation window must be in [1, 3], got {window}")
    out = list(tokens)
    for i, tok in enumerate(tokens):
        if tok.surface not in NEGATION_WORDS:
            continue
        for j in range(i + 1, min(i + 1 + window, len(out))):
            nxt = out[j]
            if nxt.surface in NEGATION_WORDS or nxt.is_punct:
                break
            out[j] = replace(nxt, negated=True)
    return out


def process_text(text: str, negation_window: int | None = None) -> list[Token]:
    """Tokenize, optionally negation-tag, then drop punctuation."""
    tokens = tokenize(text, keep_punct=True)
    if negation_window:
        tokens = tag_negation(tokens, negation_window)
    return [t for t in tokens if not t.is_punct]


# --------------------------------------------------------------------------
# Features

def _as_token(t) -> Token:
    return t if isinstance(t, Token) else Token(str(t))


def _as_sentences(unit) -> list[list[Token]]:
    """A unit is either one token list or a list of token lists."""
    unit = list(unit)
    if not unit:
        return []
    if isinstance(unit[0], (Token, str)):
        return [[_as_token(t) for t in unit]]
    return [[_as_token(t) for t in s] for s in unit]


def feature_forms(unit, scheme: FeatureScheme) -> list[str]:
    """All feature occurrences of a unit, in order, under ``scheme``."""
    forms = []
    for sent in _as_sentences(unit):
        feats = [t.feature for t in sent]
        if scheme is FeatureScheme.BIGRAM:
            forms.extend(a + BIGRAM_JOIN + b for a, b in zip(feats, feats[1:]))
        else:
            forms.extend(feats)
    return forms


class Vocabulary:
    """Frozen term <-> index map; indices follow lexicographic term order."""

    def __init__(self, terms: Iterable[str] = (), scheme: FeatureScheme = FeatureScheme.UNIGRAM):
        self.scheme = FeatureScheme.parse(scheme)
        self.terms: tuple[str, ...] = tuple(sorted(set(terms)))
        self.index = {t: i for i, t in enumerate(self.terms)}

    @property
    def size(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.scheme is other.scheme and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Vocabulary({self.scheme.value}, size={self.size})"

    def to_lines(self) -> list[str]:
        lines = [f"vocab v1 {self.scheme.value} {self.size}"]
        lines.extend(f"{t}\t{i}" for i, t in enumerate(self.terms))
        return lines

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "Vocabulary":
        head = lines[0].split()
        if len(head) != 4 or head[:2] != ["vocab", "v1"]:
            raise ValueError(f"not a v1 vocabulary header: {lines[0]!r}")
        size = int(head[3])
        if len(lines) - 1 < size:
            raise ValueError(f"vocabulary truncated: expected {size} entries")
        terms = []
        for expected, line in enumerate(lines[1:size + 1]):
            term, idx = line.rsplit("\t", 1)
            if int(idx) != expected:
                raise ValueError(f"vocabulary index out of order at {line!r}")
            terms.append(term)
        vocab = cls(terms, FeatureScheme.parse(head[2]))
        if vocab.terms != tuple(terms):
            raise ValueError("vocabulary terms are not in canonical order")
        return vocab

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def fit_vocabulary(documents: Iterable, scheme: FeatureScheme | str = FeatureScheme.UNIGRAM,
                   min_count: int = 1) -> Vocabulary:
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}")
    scheme = FeatureScheme.parse(scheme)
    counts: Counter[str] = Counter()
    for unit in documents:
        counts.update(feature_forms(unit, scheme))
    return Vocabulary((t for t, c in counts.items() if c >= min_count), scheme)


@dataclass(frozen=True)
class SparseFeatureVector:
    indices: tuple[int, ...] = ()
    values: tuple[float, ...] = ()

    def items(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values))

    def __len__(self) -> int:
        return len(self.indices)

    def dot(self, dense: np.ndarray) -> float:
        if not self.indices:
            return 0.0
        return float(np.dot(dense[list(self.indices)], self.values))


def vectorize(unit, scheme: FeatureScheme | str, vocab: Vocabulary) -> SparseFeatureVector:
    scheme = FeatureScheme.parse(scheme)
    if scheme is not vocab.scheme:
        raise ConfigError(f"vocabulary was fitted for {vocab.scheme.value}, not {scheme.value}")
    counts = Counter(vocab.index[f] for f in feature_forms(unit, scheme) if f in vocab.index)
    indices = tuple(sorted(counts))
    if scheme is FeatureScheme.BAG_OF_WORDS:
        values = tuple(float(counts[i]) for i in indices)
    else:
        values = (1.0,) * len(indices)
    return SparseFeatureVector(indices, values)


def to_csr(vectors: Sequence[SparseFeatureVector], n_features: int) -> sp.csr_matrix:
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        indptr[i + 1] = indptr[i] + len(v)
    indices = np.fromiter((j for v in vectors for j in v.indices), dtype=np.int64, count=indptr[-1])
    data = np.fromiter((x for v in vectors for x in v.values), dtype=np.float64, count=indptr[-1])
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), n_features))
