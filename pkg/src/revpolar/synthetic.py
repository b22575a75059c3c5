"""Synthetic review corpora with planted opposite-polarity outlier sentences."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Polarity, ReviewDocument, Sentence


@dataclass(frozen=True)
class PlantedNoise:
    docs_per_class: int = 500
    sentence_counts: tuple[int, ...] = (5, 10, 15)
    outlier_fraction: float = 0.2
    neutral_vocab: int = 400
    class_vocab: int = 60
    neutral_per_sentence: tuple[int, int] = (5, 9)
    class_words: tuple[int, int] = (0, 2)
    outlier_words: tuple[int, int] = (2, 3)
    min_gap: int = 2
    domain: str = "synthetic"


def _outlier_positions(rng: random.Random, n: int, k: int, gap: int) -> list[int]:
    """k isolated positions whose in-between clean stretches are empty or >= gap long."""
    for _ in range(1000):
        pos = sorted(rng.sample(range(n), k))
        bounds = [-1] + pos + [n]
        stretches = [b - a - 1 for a, b in zip(bounds, bounds[1:])]
        inner = stretches[1:-1]
        if all(s >= gap for s in inner) and all(s == 0 or s >= gap for s in (stretches[0], stretches[-1])):
            return pos
    raise ValueError(f"cannot place {k} isolated outliers in {n} sentences")


def _sentence(rng: random.Random, cfg: PlantedNoise, prefix: str, n_class: int) -> str:
    words = [f"w{rng.randrange(cfg.neutral_vocab)}" for _ in range(rng.randint(*cfg.neutral_per_sentence))]
    for _ in range(n_class):
        words.insert(rng.randrange(len(words) + 1), f"{prefix}{rng.randrange(cfg.class_vocab)}")
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def planted_noise_corpus(seed: int = 0, cfg: PlantedNoise = PlantedNoise()) -> list[ReviewDocument]:
    """Documents whose outlier sentences use only the opposite class's vocabulary.

    Every outlier forms a run of length one; clean stretches between outliers
    are at least ``min_gap`` sentences long.
    """
    rng = random.Random(seed)
    prefix = {Polarity.POSITIVE: "pos", Polarity.NEGATIVE: "neg"}
    docs = []
    for label in (Polarity.POSITIVE, Polarity.NEGATIVE):
        for ordinal in range(cfg.docs_per_class):
            n = rng.choice(cfg.sentence_counts)
            k = round(cfg.outlier_fraction * n)
            outliers = set(_outlier_positions(rng, n, k, cfg.min_gap))
            texts = []
            for i in range(n):
                if i in outliers:
                    texts.append(_sentence(rng, cfg, prefix[label.flip()], rng.randint(*cfg.outlier_words)))
                else:
                    texts.append(_sentence(rng, cfg, prefix[label], rng.randint(*cfg.class_words)))
            doc = ReviewDocument(f"{cfg.domain}-{label.value}-{ordinal}", cfg.domain, label, " ".join(texts))
            doc.sentences = [Sentence(i, t) for i, t in enumerate(texts)]
            docs.append(doc)
    return docs
