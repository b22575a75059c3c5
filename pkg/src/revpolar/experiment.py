"""Train/test grid over learners, feature schemes and corrected/standard pipelines."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Sequence

from .corpus import ReviewDocument, ensure_segmented, split_dataset
from .correction import CorrectedPools, CorrectionConfig, correct_document, correct_training_set
from .learn import ModelKind, TrainedModel, predict, train_document_model
from .metrics import ConfusionCounts, EvalReport, bootstrap_ci
from .naive import NaiveSentenceModel, fit_naive
from .textproc import FeatureScheme, fit_vocabulary, process_text

log = logging.getLogger(__name__)

BASELINE_NOTE = "correction-free pipeline; the subjectivity-detector baseline is not reproduced"


@dataclass(frozen=True)
class GridRow:
    scheme: FeatureScheme
    corrected: bool = False
    baseline: bool = False

    def label(self, kind: ModelKind) -> str:
        if self.baseline:
            return f"{kind.value}-Baseline"
        return f"{kind.value}-{self.scheme.value}" + ("-cor" if self.corrected else "")


DEFAULT_ROWS = (
    GridRow(FeatureScheme.BIGRAM, corrected=True),
    GridRow(FeatureScheme.BAG_OF_WORDS, corrected=True),
    GridRow(FeatureScheme.UNIGRAM, corrected=True),
    GridRow(FeatureScheme.BIGRAM),
    GridRow(FeatureScheme.BAG_OF_WORDS),
    GridRow(FeatureScheme.UNIGRAM),
    GridRow(FeatureScheme.UNIGRAM, baseline=True),
)
DEFAULT_KINDS = (ModelKind.SVM, ModelKind.NAIVE_BAYES)


@dataclass
class ExperimentSettings:
    domain: str = "all"
    ratio: float = 0.8
    seed: int = 0
    kinds: Sequence[ModelKind] = DEFAULT_KINDS
    rows: Sequence[GridRow] = DEFAULT_ROWS
    correction: CorrectionConfig = field(default_factory=CorrectionConfig)
    # where negation tagging applies: "corrected" rows only, "all" rows, or "none"
    negation_scope: str = "corrected"
    naive_alpha: float = 1.0
    min_count: int = 2
    hyper: Mapping[str, Any] = field(default_factory=dict)
    bootstrap: int = 0
    jobs: int = 1

    def snapshot(self) -> dict[str, Any]:
        corr = asdict(self.correction)
        corr["fallback"] = self.correction.fallback.value
        return {
            "domain": self.domain, "ratio": self.ratio, "seed": self.seed,
            "correction": corr, "negation_scope": self.negation_scope,
            "naive_alpha": self.naive_alpha, "min_count": self.min_count,
            "hyper": {k: self.hyper[k] for k in sorted(self.hyper)}, "bootstrap": self.bootstrap,
        }


@dataclass
class CorrectedData:
    naive: NaiveSentenceModel
    train: list[ReviewDocument]
    test: list[ReviewDocument]
    pools: CorrectedPools | None = None


@dataclass
class ExperimentResult:
    reports: list[EvalReport]
    models: dict[str, TrainedModel] = field(default_factory=dict)
    predictions: dict[str, list[dict]] = field(default_factory=dict)
    corrected: CorrectedData | None = None
    train_ids: list[str] = field(default_factory=list)
    test_ids: list[str] = field(default_factory=list)


def tokenize_sentences(doc: ReviewDocument, negation_window: int | None) -> ReviewDocument:
    sentences = [replace(s, tokens=process_text(s.text, negation_window)) for s in doc.sentences]
    return replace(doc, sentences=sentences)


def train_naive_model(train_docs: Sequence[ReviewDocument], alpha: float = 1.0) -> NaiveSentenceModel:
    """Naive sentence model over every training sentence, labelled by its document."""
    sentences = [(s.tokens, d.label) for d in train_docs for s in d.sentences]
    vocab = fit_vocabulary([t for t, _ in sentences], FeatureScheme.UNIGRAM, min_count=1)
    return fit_naive(sentences, vocab, alpha)


def prepare_corrected(train: Sequence[ReviewDocument], test: Sequence[ReviewDocument],
                      cfg: CorrectionConfig, naive_alpha: float = 1.0) -> CorrectedData:
    """Both correction stages: re-pool and retrain the naive model, then filter documents."""
    window = cfg.negation_window
    train_tok = [tokenize_sentences(d, window) for d in train]
    test_tok = [tokenize_sentences(d, window) for d in test]
    naive = train_naive_model(train_tok, naive_alpha)
    pools = None
    if cfg.trainset_correction:
        pools = correct_training_set([(s.tokens, d.label) for d in train_tok for s in d.sentences], naive)
        log.info("training-set correction moved %d sentence(s) to positive, %d to negative",
                 pools.moved_to_positive, pools.moved_to_negative)
        if cfg.retrain_naive_after_trainset_correction:
            naive = fit_naive(pools.labelled(), naive.vocab, naive_alpha)
    if cfg.sentence_correction:
        train_tok = [correct_document(d, naive, cfg) for d in train_tok]
        test_tok = [correct_document(d, naive, cfg) for d in test_tok]
    return CorrectedData(naive, train_tok, test_tok, pools)


def _negation_for(row: GridRow, settings: ExperimentSettings) -> int | None:
    if row.baseline or settings.negation_scope == "none":
        return None
    if row.corrected or settings.negation_scope == "all":
        return settings.correction.negation_window
    return None


def _run_cell(kind: ModelKind, row: GridRow, train: Sequence[ReviewDocument], test: Sequence[ReviewDocument],
              settings: ExperimentSettings, naive: NaiveSentenceModel | None):
    name = row.label(kind)
    base = dict(model=name, kind=kind.value, scheme=row.scheme.value, domain=settings.domain,
                corrected=row.corrected)
    snapshot = settings.snapshot()
    extra = {"baseline": row.baseline, "config": snapshot, "notes": BASELINE_NOTE if row.baseline else ""}
    try:
        meta = {"domain": settings.domain, "corrected": row.corrected, "config": snapshot}
        model = train_document_model(train, row.scheme, kind, settings.hyper, _negation_for(row, settings),
                                     settings.min_count, meta)
        if row.corrected:
            model.naive = naive
            cfg = settings.correction
            model.metadata["correction"] = {"theta": cfg.theta, "fallback": cfg.fallback.value,
                                            "negation_window": cfg.negation_window}
        gold, pred, dump = [], [], []
        for doc in test:
            label, score = predict(model, doc)
            gold.append(doc.label)
            pred.append(label)
            dump.append({"id": doc.id, "gold": doc.label.value, "predicted": label.value, "score": score})
        counts = ConfusionCounts.from_pairs(gold, pred)
        report = EvalReport.build(counts=counts, **base, **extra)
        if settings.bootstrap:
            report.confidence = bootstrap_ci(gold, pred, settings.bootstrap, seed=settings.seed)
        return report, model, dump
    except Exception as exc:  # one failed cell must not abort the grid
        log.error("cell %s failed: %s", name, exc)
        return EvalReport(**base, **extra, error=f"{type(exc).__name__}: {exc}"), None, []


def run_experiment(corpus: Sequence[ReviewDocument], settings: ExperimentSettings | None = None) -> ExperimentResult:
    settings = settings or ExperimentSettings()
    docs = ensure_segmented(corpus)
    if len({d.label for d in docs}) < 2:
        raise ValueError("corpus must contain both polarities")
    split = split_dataset(docs, settings.ratio, settings.seed)

    corrected, prep_error = None, None
    if any(r.corrected for r in settings.rows):
        try:
            corrected = prepare_corrected(split.train, split.test, settings.correction, settings.naive_alpha)
        except Exception as exc:
            log.error("correction stages failed: %s", exc)
            prep_error = f"{type(exc).__name__}: {exc}"

    jobs, failed = [], {}
    for kind in settings.kinds:
        for row in settings.rows:
            if row.corrected and corrected is None:
                failed[len(jobs) + len(failed)] = EvalReport(
                    row.label(kind), kind.value, row.scheme.value, settings.domain, True,
                    config=settings.snapshot(), error=prep_error)
            elif row.corrected:
                jobs.append((kind, row, corrected.train, corrected.test, settings, corrected.naive))
            else:
                jobs.append((kind, row, split.train, split.test, settings, None))

    if settings.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=settings.jobs) as pool:
            outcomes = list(pool.map(_run_cell_star, jobs))
    else:
        outcomes = [_run_cell(*job) for job in jobs]
    for pos in sorted(failed):
        outcomes.insert(pos, (failed[pos], None, []))

    result = ExperimentResult([], corrected=corrected, train_ids=[d.id for d in split.train],
                              test_ids=[d.id for d in split.test])
    for report, model, dump in outcomes:
        result.reports.append(report)
        if model is not None:
            result.models[report.model] = model
            result.predictions[report.model] = dump
    return result


def _run_cell_star(args):
    return _run_cell(*args)
