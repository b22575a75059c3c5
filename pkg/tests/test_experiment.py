from dataclasses import replace

import pytest

from revpolar.correction import CorrectionConfig
from revpolar.corpus import Polarity, ReviewDocument
from revpolar.experiment import BASELINE_NOTE, DEFAULT_ROWS, ExperimentSettings, GridRow, run_experiment
from revpolar.learn import ModelKind
from revpolar.report import render_csv, render_json
from revpolar.synthetic import PlantedNoise, planted_noise_corpus
from revpolar.textproc import FeatureScheme

SMALL = PlantedNoise(docs_per_class=40)


@pytest.fixture(scope="module")
def corpus():
    return planted_noise_corpus(0, SMALL)


@pytest.fixture(scope="module")
def default_run(corpus):
    return run_experiment(corpus, ExperimentSettings(domain="synthetic"))


def test_full_grid(default_run):
    names = [r.model for r in default_run.reports]
    assert len(names) == 14 and len(set(names)) == 14
    assert names[:7] == [row.label(ModelKind.SVM) for row in DEFAULT_ROWS]
    assert all(r.ok and r.n_test == 16 for r in default_run.reports)
    baseline = [r for r in default_run.reports if r.baseline]
    assert [r.model for r in baseline] == ["SVM-Baseline", "NB-Baseline"]
    assert all(r.notes == BASELINE_NOTE for r in baseline)


def test_shared_split(default_run):
    assert len(default_run.train_ids) == 64 and len(default_run.test_ids) == 16
    for dump in default_run.predictions.values():
        assert [row["id"] for row in dump] == default_run.test_ids


def test_corrected_models_carry_naive(default_run):
    for name, model in default_run.models.items():
        assert (model.naive is not None) == name.endswith("-cor")


def test_byte_identical_reruns(corpus, default_run):
    again = run_experiment(corpus, ExperimentSettings(domain="synthetic"))
    assert render_json(again.reports) == render_json(default_run.reports)
    assert render_csv(again.reports) == render_csv(default_run.reports)


def test_parallel_matches_serial(corpus, default_run):
    par = run_experiment(corpus, ExperimentSettings(domain="synthetic", jobs=2))
    assert render_json(par.reports) == render_json(default_run.reports)


@pytest.mark.parametrize("scope", ["all", "none"])
def test_disabled_correction_equivalence(corpus, scope):
    cfg = CorrectionConfig(theta=1, trainset_correction=False, sentence_correction=False)
    result = run_experiment(corpus, ExperimentSettings(domain="synthetic", correction=cfg, negation_scope=scope))
    by_name = {r.model: r for r in result.reports}
    for kind in ModelKind:
        for scheme in FeatureScheme:
            cor = by_name[GridRow(scheme, True).label(kind)]
            std = by_name[GridRow(scheme).label(kind)]
            assert cor.metrics_payload() == std.metrics_payload()


def test_theta_one_with_both_stages_keeps_every_sentence(corpus):
    result = run_experiment(corpus, ExperimentSettings(correction=CorrectionConfig(theta=1)))
    assert all(len(d.sentences) == len(d.consistency.polarities) for d in result.corrected.test)


def test_correction_helps_on_planted_noise(default_run):
    f1 = {r.model: r.f1 for r in default_run.reports}
    assert f1["NB-Unigram-cor"] >= f1["NB-Unigram"]


def test_failed_cell_does_not_abort(corpus):
    settings = ExperimentSettings(hyper={"C": -1.0})
    result = run_experiment(corpus, settings)
    svm = [r for r in result.reports if r.kind == "SVM"]
    nb = [r for r in result.reports if r.kind == "NB"]
    assert all(not r.ok and "C must be positive" in r.error for r in svm)
    assert len(nb) == 7


def test_failed_correction_stage_marks_corrected_cells(corpus):
    # every training sentence identical: the naive model sends all to one pool
    flat = [replace(d, raw_text="Same words here.", sentences=[]) for d in corpus]
    result = run_experiment(flat, ExperimentSettings())
    for r in result.reports:
        assert r.ok != r.corrected
        if r.corrected:
            assert "CorrectionError" in r.error
    assert len(result.reports) == 14


def test_single_label_corpus_rejected():
    docs = [ReviewDocument(f"d{i}", "x", Polarity.POSITIVE, "Fine.") for i in range(4)]
    with pytest.raises(ValueError):
        run_experiment(docs)
