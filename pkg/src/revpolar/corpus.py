"""Review ingestion, sentence segmentation and stratified train/test splits."""

from __future__ import annotations

import json
import logging
import math
import random
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

log = logging.getLogger(__name__)

KNOWN_DOMAINS = ("beauty", "books", "kitchen", "software")


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def sign(self) -> int:
        return 1 if self is Polarity.POSITIVE else -1

    def flip(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE

    @classmethod
    def parse(cls, value: "str | Polarity") -> "Polarity":
        if isinstance(value, Polarity):
            return value
        key = str(value).strip().lower()
        aliases = {"pos": "positive", "p": "positive", "+1": "positive", "1": "positive",
                   "neg": "negative", "n": "negative", "-1": "negative", "0": "negative"}
        return cls(aliases.get(key, key))


@dataclass
class Sentence:
    index: int
    text: str
    tokens: list = field(default_factory=list)


@dataclass
class ReviewDocument:
    id: str
    domain: str
    label: Polarity
    raw_text: str
    sentences: list[Sentence] = field(default_factory=list)
    # ConsistencyResult attached by sentence-level correction, if any
    consistency: Any = None


@dataclass
class DatasetSplit:
    train: list[ReviewDocument]
    test: list[ReviewDocument]
    seed: int
    ratio: float


class CorpusError(Exception):
    """Raised for unreadable inputs and impossible splits."""


@dataclass
class ParseStats:
    skipped: int = 0
    replaced_chars: int = 0


# --------------------------------------------------------------------------
# Decoding

def _read_text(path: Path, stats: ParseStats) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    text = data.decode("utf-8", errors="replace")
    # genuine U+FFFD in the input is not a decoding error
    stats.replaced_chars += text.count("\ufffd") - data.count("\ufffd".encode())
    return text


_ENTITIES = (("&lt;", "<"), ("&gt;", ">"), ("&quot;", '"'), ("&amp;", "&"))


def decode_entities(text: str) -> str:
    # &amp; last so that "&amp;lt;" decodes to "&lt;", not "<"
    for ent, ch in _ENTITIES:
        text = text.replace(ent, ch)
    return text


# --------------------------------------------------------------------------
# Parsing

_REVIEW_TAG = re.compile(r"<(/?)review>")
_REVIEW_TEXT = re.compile(r"<review_text>(.*?)</review_text>", re.DOTALL)


def _blitzer_records(text: str, stats: ParseStats) -> list[tuple[int, str]]:
    """Tolerant scan of ``<review>`` blocks; returns (ordinal, review_text)."""
    out = []
    start = None
    ordinal = 0
    for m in _REVIEW_TAG.finditer(text):
        if m.group(1) == "":
            if start is not None:
                log.warning("unterminated <review> block #%d skipped", ordinal)
                stats.skipped += 1
                ordinal += 1
            start = m.end()
            continue
        if start is None:
            log.warning("stray </review> at offset %d ignored", m.start())
            stats.skipped += 1
            continue
        body = text[start:m.start()]
        start = None
        found = _REVIEW_TEXT.search(body)
        if found is None or not found.group(1).strip():
            log.warning("review block #%d has no review_text; skipped", ordinal)
            stats.skipped += 1
        else:
            out.append((ordinal, decode_entities(found.group(1).strip())))
        ordinal += 1
    if start is not None:
        log.warning("unterminated <review> block #%d skipped", ordinal)
        stats.skipped += 1
    return out


def _jsonl_records(text: str, stats: ParseStats) -> list[tuple[int, dict]]:
    out = []
    for lineno, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict) or not isinstance(rec.get("text"), str) or not rec["text"].strip():
                raise ValueError("record needs a non-empty 'text' field")
        except ValueError as exc:
            log.warning("line %d skipped: %s", lineno + 1, exc)
            stats.skipped += 1
            continue
        out.append((len(out), rec))
    return out


def _looks_like_jsonl(path: Path, text: str) -> bool:
    if path.suffix in (".jsonl", ".json"):
        return True
    return text.lstrip().startswith("{")


def parse_review_records(path: str | Path, domain: str, label: Polarity | str,
                         stats: ParseStats | None = None) -> list[ReviewDocument]:
    """Read one label's reviews from a Blitzer pseudo-XML file or a JSONL file.

    Documents come back unsegmented. Ids are ``<domain>-<label>-<ordinal>``
    unless a JSONL record carries its own ``id``. Malformed records are
    skipped and counted in ``stats``.
    """
    path = Path(path)
    label = Polarity.parse(label)
    stats = stats if stats is not None else ParseStats()
    text = _read_text(path, stats)
    docs = []
    if _looks_like_jsonl(path, text):
        for ordinal, rec in _jsonl_records(text, stats):
            doc_id = str(rec["id"]) if rec.get("id") is not None else f"{domain}-{label.value}-{ordinal}"
            docs.append(ReviewDocument(doc_id, domain, label, rec["text"]))
    else:
        for ordinal, body in _blitzer_records(text, stats):
            docs.append(ReviewDocument(f"{domain}-{label.value}-{ordinal}", domain, label, body))
    if stats.skipped:
        log.warning("%s: %d malformed record(s) skipped", path, stats.skipped)
    return docs


# --------------------------------------------------------------------------
# Segmentation

ABBREVIATIONS = frozenset({"mr.", "mrs.", "dr.", "st.", "vs.", "e.g.", "i.e.", "etc."})

_TERMINATOR = re.compile(r"[.!?]+[\"')\]]*")
_NEXT_START = re.compile(r"\s+[\"'(\[]*[A-Z]")
_NON_SPACE = re.compile(r"\S")


def _is_abbreviation(text: str, term_start: int, term_end: int) -> bool:
    if text[term_start:term_end] != ".":
        return False
    word_start = term_start
    while word_start > 0 and not text[word_start - 1].isspace():
        word_start -= 1
    return text[word_start:term_end].lower() in ABBREVIATIONS


def split_sentences(text: str) -> list[str]:
    """Rule-based splitter; text with no usable terminator is one sentence."""
    pieces = []
    start = 0
    for m in _TERMINATOR.finditer(text):
        end = m.end()
        at_end = _NON_SPACE.search(text, end) is None
        if not at_end and not _NEXT_START.match(text, end):
            continue
        if _is_abbreviation(text, m.start(), m.start() + 1) and m.group() == ".":
            continue
        piece = text[start:end].strip()
        if piece:
            pieces.append(piece)
        start = end
    tail = text[start:].strip()
    if tail:
        pieces.append(tail)
    return pieces


def segment_sentences(doc: ReviewDocument) -> ReviewDocument:
    if not doc.raw_text.strip():
        raise CorpusError(f"document {doc.id} has empty text")
    sentences = [Sentence(i, s) for i, s in enumerate(split_sentences(doc.raw_text))]
    return replace(doc, sentences=sentences)


# --------------------------------------------------------------------------
# Splitting

def split_dataset(corpus: Sequence[ReviewDocument], ratio: float = 0.8, seed: int = 0) -> DatasetSplit:
    """Stratified split per (domain, label) cell; outputs keep corpus order."""
    if not 0.0 < ratio < 1.0:
        raise CorpusError(f"ratio must lie in (0, 1), got {ratio}")
    if not corpus:
        raise CorpusError("cannot split an empty corpus")
    cells: dict[tuple[str, str], list[int]] = {}
    for i, doc in enumerate(corpus):
        cells.setdefault((doc.domain, doc.label.value), []).append(i)

    rng = random.Random(seed)
    train_idx: set[int] = set()
    for key in sorted(cells):
        members = list(cells[key])
        if len(members) < 2:
            raise CorpusError(f"cell {key} has {len(members)} document(s); need at least 2 to stratify")
        n_train = int(math.floor(ratio * len(members) + 0.5))
        n_train = min(max(n_train, 1), len(members) - 1)
        rng.shuffle(members)
        train_idx.update(members[:n_train])

    train = [d for i, d in enumerate(corpus) if i in train_idx]
    test = [d for i, d in enumerate(corpus) if i not in train_idx]
    return DatasetSplit(train, test, seed, ratio)


# --------------------------------------------------------------------------
# Canonical JSONL

def document_to_record(doc: ReviewDocument) -> dict:
    rec = {"id": doc.id, "domain": doc.domain, "label": doc.label.value, "text": doc.raw_text}
    if doc.sentences:
        rec["sentences"] = [s.text for s in doc.sentences]
    return rec


def record_to_document(rec: dict) -> ReviewDocument:
    doc = ReviewDocument(str(rec["id"]), str(rec["domain"]), Polarity.parse(rec["label"]), rec["text"])
    if rec.get("sentences"):
        doc.sentences = [Sentence(i, s) for i, s in enumerate(rec["sentences"])]
    return doc


def write_corpus(docs: Iterable[ReviewDocument], path: str | Path) -> int:
    n = 0
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for doc in docs:
                fh.write(json.dumps(document_to_record(doc), ensure_ascii=False) + "\n")
                n += 1
    except OSError as exc:
        raise CorpusError(f"cannot write {path}: {exc}") from exc
    return n


def read_corpus(path: str | Path, stats: ParseStats | None = None) -> list[ReviewDocument]:
    """Read a canonical corpus; records missing id/domain/label are skipped."""
    path = Path(path)
    stats = stats if stats is not None else ParseStats()
    text = _read_text(path, stats)
    docs = []
    for _, rec in _jsonl_records(text, stats):
        try:
            docs.append(record_to_document(rec))
        except (KeyError, ValueError) as exc:
            log.warning("%s: record skipped (%s)", path, exc)
            stats.skipped += 1
    return docs


def ensure_segmented(docs: Iterable[ReviewDocument]) -> list[ReviewDocument]:
    return [d if d.sentences else segment_sentences(d) for d in docs]
