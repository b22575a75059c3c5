import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import joint_log_scores
from revpolar.corpus import Polarity
from revpolar.naive import NaiveModelError, NaiveSentenceModel, fit_naive, score_sentence
from revpolar.textproc import FeatureScheme, Token, Vocabulary, fit_vocabulary

POS, NEG = Polarity.POSITIVE, Polarity.NEGATIVE


def toks(*words):
    return [Token(w) for w in words]


def toy():
    data = [(toks("good"), POS), (toks("good", "fine"), POS), (toks("bad"), NEG)]
    vocab = fit_vocabulary([t for t, _ in data], FeatureScheme.UNIGRAM)
    return data, vocab


class TestFit:
    def test_priors_are_sentence_fractions(self):
        data = [(toks("a"), POS)] * 3 + [(toks("b"), NEG)]
        model = fit_naive(data, fit_vocabulary([t for t, _ in data]))
        assert model.priors == {POS: 0.75, NEG: 0.25}

    def test_smoothed_estimate(self):
        data, vocab = toy()
        model = fit_naive(data, vocab, alpha=1.0)
        assert vocab.size == 3
        assert model.conditional(POS)[vocab.index["good"]] == pytest.approx((2 + 1) / (3 + 3))

    def test_conditionals_are_distributions(self):
        data, vocab = toy()
        model = fit_naive(data, vocab, alpha=0.3)
        for c in Polarity:
            assert model.conditional(c).sum() == pytest.approx(1.0)

    def test_separable_corpus_self_classifies(self):
        data = [(toks("great", "love"), POS), (toks("nice"), POS), (toks("awful"), NEG), (toks("hate", "bad"), NEG)]
        model = fit_naive(data, fit_vocabulary([t for t, _ in data]))
        assert [model.score(t).predicted for t, _ in data] == [c for _, c in data]

    def test_missing_class(self):
        with pytest.raises(NaiveModelError):
            fit_naive([(toks("a"), POS)], Vocabulary(["a"]))

    def test_nonpositive_alpha(self):
        data, vocab = toy()
        with pytest.raises(NaiveModelError):
            fit_naive(data, vocab, alpha=0)


class TestScore:
    def test_empty_sentence_prior_tie(self):
        data = [(toks("a"), POS), (toks("b"), NEG)]
        sp = score_sentence(fit_naive(data, fit_vocabulary([t for t, _ in data])), [])
        assert sp.score_pos == -1.0 and sp.score_neg == -1.0
        assert sp.predicted is POS

    def test_toy_prediction_matches_hand_scores(self):
        data, vocab = toy()
        sp = score_sentence(fit_naive(data, vocab), toks("good"))
        # pos: log2(2/3) + log2(3/6); neg: log2(1/3) + log2(1/4)
        assert sp.score_pos == pytest.approx(math.log2(2 / 3) + math.log2(0.5), abs=1e-12)
        assert sp.score_neg == pytest.approx(math.log2(1 / 3) + math.log2(0.25), abs=1e-12)
        assert sp.predicted is POS

    def test_prior_dominates_equal_likelihoods(self):
        data = [(toks("x"), POS)] * 3 + [(toks("x"), NEG)]
        model = fit_naive(data, fit_vocabulary([t for t, _ in data]))
        assert model.score(toks("x", "y")).predicted is POS

    def test_oov_skipped(self):
        data, vocab = toy()
        model = fit_naive(data, vocab)
        assert model.score(toks("good", "zzz")) == model.score(toks("good"))

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_matches_term_by_term_oracle(self, data):
        words = [f"w{i}" for i in range(data.draw(st.integers(1, 12)))]
        sent = st.lists(st.sampled_from(words), max_size=6)
        pos = data.draw(st.lists(sent, min_size=1, max_size=5))
        neg = data.draw(st.lists(sent, min_size=1, max_size=5))
        alpha = data.draw(st.sampled_from([0.1, 0.5, 1.0, 2.0]))
        query = data.draw(st.lists(st.sampled_from(words + ["oov"]), max_size=8))
        train = [(s, "pos") for s in pos] + [(s, "neg") for s in neg]
        vocab = fit_vocabulary([toks(*s) for s, _ in train])
        model = fit_naive([(toks(*s), POS if c == "pos" else NEG) for s, c in train], vocab, alpha)
        expected = joint_log_scores(train, query, alpha, vocab.terms)
        got = model.score(toks(*query))
        assert got.score_pos == pytest.approx(expected["pos"], abs=1e-9)
        assert got.score_neg == pytest.approx(expected["neg"], abs=1e-9)

    def test_duplicated_training_keeps_predictions(self):
        # Counts, priors and the smoothing mass all scale by k, so every estimate is unchanged.
        rng = random.Random(4)
        words = [f"w{i}" for i in range(15)]
        data = [(toks(*rng.choices(words, k=rng.randint(1, 6))), rng.choice([POS, NEG])) for _ in range(30)]
        vocab = fit_vocabulary([t for t, _ in data])
        queries = [toks(*rng.choices(words, k=rng.randint(0, 8))) for _ in range(200)]
        once = fit_naive(data, vocab)
        for k in (2, 3):
            many = fit_naive(data * k, vocab, alpha=float(k))
            for q in queries:
                a, b = once.score(q), many.score(q)
                assert a.predicted is b.predicted
                assert a.score_pos - a.score_neg == pytest.approx(b.score_pos - b.score_neg, abs=1e-9)

    def test_duplication_with_fixed_alpha_can_flip(self):
        # With alpha held at 1 the smoothing mass does not scale, so near-ties can move.
        rng = random.Random(4)
        words = [f"w{i}" for i in range(15)]
        data = [(toks(*rng.choices(words, k=rng.randint(1, 6))), rng.choice([POS, NEG])) for _ in range(30)]
        vocab = fit_vocabulary([t for t, _ in data])
        queries = [toks(*rng.choices(words, k=rng.randint(0, 8))) for _ in range(200)]
        once, twice = fit_naive(data, vocab), fit_naive(data + data, vocab)
        flips = [i for i, q in enumerate(queries) if once.score(q).predicted is not twice.score(q).predicted]
        assert 153 in flips

    def test_positive_leaning_token_never_flips_positive(self):
        rng = random.Random(9)
        words = [f"w{i}" for i in range(10)]
        data = [(toks(*rng.choices(words, k=4)), rng.choice([POS, NEG])) for _ in range(40)]
        data += [(toks("w0"), POS), (toks("w1"), NEG)]
        vocab = fit_vocabulary([t for t, _ in data])
        model = fit_naive(data, vocab)
        leaning = [w for w in words if model.conditional(POS)[vocab.index[w]] > model.conditional(NEG)[vocab.index[w]]]
        assert leaning
        for _ in range(300):
            s = toks(*rng.choices(words, k=rng.randint(0, 6)))
            if model.score(s).predicted is POS:
                for w in leaning:
                    assert model.score(s + toks(w)).predicted is POS


def test_file_round_trip(tmp_path):
    data, vocab = toy()
    model = fit_naive(data, vocab, alpha=0.5)
    path = tmp_path / "naive.model"
    model.save(path)
    assert path.read_text(encoding="utf-8").startswith("naive v1 α=0.5 |V|=3\n")
    loaded = NaiveSentenceModel.load(path)
    assert loaded.vocab == vocab and loaded.alpha == 0.5
    for c in Polarity:
        np.testing.assert_array_equal(loaded.counts[c], model.counts[c])
    assert loaded.score(toks("good", "bad")) == model.score(toks("good", "bad"))
