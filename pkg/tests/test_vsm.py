import math
from collections import Counter

import numpy as np
import pytest

from src.classification.vsm import (
    BagOfWords, Prediction, VsmModel, accuracy, bag_of_words, build_corpus, classify, classify_many,
    cosine_scores, fit_tfidf, frequency_vector, train_model, window,
)
from src.errors import (
    EmptyInputError, InvalidParamsError, MissingLabelError, SingleClassCorpusError, UnclassifiableSampleError,
)
from src.symbolic.quantizer import Codebook, SymbolString

CODEBOOK = Codebook(1.0, 1.0, ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0)), (0, 1, 2), "sorting_based", {"ct": 0.1})


def _s(symbols, label=None, sid=0):
    return SymbolString(sid, label, tuple(symbols))


def _model(strings, wsize=1, wstep=1):
    return train_model(strings, CODEBOOK, wsize, wstep)


def test_window():
    assert window(_s([0, 1, 2, 3, 4]), 3, 1) == [(0, 1, 2), (1, 2, 3), (2, 3, 4)]
    assert window(_s([0, 1, 2, 3, 4]), 3, 2) == [(0, 1, 2), (2, 3, 4)]
    assert window(_s([0, 1, 2, 3, 4, 5]), 3, 2) == [(0, 1, 2), (2, 3, 4)]
    assert window([0, 1], 3, 1) == [(0, 1)]
    assert window([], 3, 1) == []
    with pytest.raises(InvalidParamsError):
        window([0, 1], 0, 1)


def test_corpus_groups_by_class():
    bags = [bag_of_words(_s([0, 0, 1], "b"), 1, 1), bag_of_words(_s([2], "a"), 1, 1),
            bag_of_words(_s([0], "b"), 1, 1)]
    corpus = build_corpus(bags)
    assert list(corpus) == ["a", "b"]
    assert corpus["b"] == Counter({(0,): 3, (1,): 1})


def test_corpus_errors():
    with pytest.raises(EmptyInputError):
        build_corpus([])
    with pytest.raises(SingleClassCorpusError):
        build_corpus([bag_of_words(_s([0], "a"), 1, 1), bag_of_words(_s([1], "a"), 1, 1)])
    with pytest.raises(MissingLabelError):
        build_corpus([BagOfWords(0, None, {(0,): 1})])


def _brute_force(corpus):
    labels = sorted(corpus)
    vocab = sorted({w for doc in corpus.values() for w in doc})
    out = {}
    for label in labels:
        total = sum(corpus[label].values())
        for w in vocab:
            tf = corpus[label][w] / total
            df = sum(1 for c in labels if corpus[c][w] > 0)
            out[(w, label)] = tf * math.log(len(labels) / df)
    return out


def test_tfidf_matches_brute_force():
    rng = np.random.Generator(np.random.PCG64(17))
    for _ in range(100):
        n_classes = int(rng.integers(2, 6))
        n_words = int(rng.integers(1, 51))
        words = [tuple(int(x) for x in rng.integers(0, 4, int(rng.integers(1, 4)))) for _ in range(n_words)]
        corpus = {}
        for c in range(n_classes):
            picks = rng.choice(len(words), int(rng.integers(1, 2 * n_words + 1)))
            corpus[f"c{c}"] = Counter(words[i] for i in picks)
        tfidf = fit_tfidf(corpus)
        expected = _brute_force(corpus)
        assert tfidf.class_labels == tuple(sorted(corpus))
        assert list(tfidf.vocabulary) == sorted(tfidf.vocabulary)
        for j, w in enumerate(tfidf.vocabulary):
            for i, label in enumerate(tfidf.class_labels):
                want = expected[(w, label)]
                got = tfidf.weights[j, i]
                assert abs(got - want) <= 1e-12 * max(abs(want), 1e-300)


def test_word_in_every_class_weighs_zero():
    tfidf = fit_tfidf({"a": Counter({(0,): 2, (1,): 1}), "b": Counter({(0,): 1})})
    assert tfidf.weights[0].tolist() == [0.0, 0.0]
    assert tfidf.weights[1, 0] == pytest.approx(math.log(2) / 3)


def test_scores_in_unit_interval_and_scale_invariant():
    rng = np.random.Generator(np.random.PCG64(3))
    strings = [_s(rng.integers(0, 3, 12), label, i) for i, label in enumerate("abcabcabc")]
    model = _model(strings, wsize=2)
    for _ in range(50):
        w = rng.integers(0, 4, len(model.vocabulary)).astype(float)
        if not w.any():
            continue
        scores = cosine_scores(w, model)
        assert np.all(scores >= 0.0) and np.all(scores <= 1.0)
        np.testing.assert_allclose(cosine_scores(2.0 * w, model), scores, rtol=1e-12, atol=0)


def test_training_samples_come_back_to_their_class():
    strings = [_s([0, 0, 0], "A", 0), _s([0, 0], "A", 1), _s([1, 1, 1], "B", 2), _s([1], "B", 3)]
    model = _model(strings)
    assert model.weights[:, 0].tolist() == pytest.approx([math.log(2), 0.0])
    assert model.weights[:, 1].tolist() == pytest.approx([0.0, math.log(2)])
    preds = classify_many(strings, model)
    assert [p.predicted for p in preds] == ["A", "A", "B", "B"]
    assert preds[0].scores == pytest.approx({"A": 1.0, "B": 0.0})
    assert accuracy(preds) == 1.0


def test_ties_go_to_the_first_class():
    strings = [_s([0, 1], "A"), _s([0, 1], "B"), _s([2], "C")]
    model = _model(strings)
    pred = classify(_s([2, 0]), model)
    # columns A and B are identical
    assert pred.scores["A"] == pred.scores["B"]
    assert pred.predicted == "C"
    pred = classify(_s([0, 1]), model)
    assert pred.predicted == "A"


def test_zero_norm_class_scores_zero():
    model = _model([_s([0], "A"), _s([0, 1], "B")])
    assert not model.weights[:, 0].any()
    pred = classify(_s([0, 0]), model)
    assert pred.scores == {"A": 0.0, "B": 0.0}
    assert pred.predicted == "A"


def test_out_of_vocabulary_words():
    strings = [_s([0], "A", 0), _s([0], "A", 1), _s([1], "B", 2)]
    model = _model(strings)
    unseen = _s([2, 2], "B", 9)
    assert not frequency_vector(unseen, model).any()
    with pytest.raises(UnclassifiableSampleError) as exc:
        classify(unseen, model)
    assert exc.value.sample_id == 9
    fb = classify(unseen, model, fallback=True)
    assert (fb.predicted, fb.status) == ("A", "fallback")
    row = classify_many([unseen], model)[0]
    assert (row.predicted, row.status, row.correct) == (None, "unclassifiable", False)


def test_two_point_sample_gets_a_prediction():
    model = _model([_s([0], "A"), _s([1], "B")])
    pred = classify(_s([1]), model, fallback=True)
    assert (pred.predicted, pred.status) == ("B", "ok")


def test_accuracy():
    preds = [Prediction(i, "x", {}, actual="x" if i < 9 else "y") for i in range(10)]
    assert accuracy(preds) == 0.9
    assert accuracy([]) == 0.0


def test_model_keeps_training_facts():
    model = _model([_s([0], "A"), _s([0], "A"), _s([1], "B")], wsize=2, wstep=1)
    assert isinstance(model, VsmModel)
    assert model.class_sizes == {"A": 2, "B": 1}
    assert model.word_index((0,)) == 0
    assert model.word_index((2,)) is None
