"""Bag of ABBA words, per-class TF-IDF weights and cosine-similarity classification."""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    EmptyInputError, InvalidParamsError, MissingLabelError,
    SingleClassCorpusError, UnclassifiableSampleError,
)
from src.symbolic.quantizer import Codebook, SymbolString

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
Corpus = Dict[str, Counter]


@dataclass(frozen=True)
class BagOfWords:
    sample_id: int
    label: Optional[str]
    counts: Dict[Word, int]


@dataclass(frozen=True)
class TfidfWeights:
    vocabulary: Tuple[Word, ...]
    class_labels: Tuple[str, ...]
    weights: np.ndarray  # rows = words, columns = classes


@dataclass(frozen=True, eq=False)
class VsmModel:
    vocabulary: Tuple[Word, ...]
    class_labels: Tuple[str, ...]
    weights: np.ndarray
    wsize: int
    wstep: int
    codebook: Codebook
    rt: Optional[float] = None
    class_sizes: Dict[str, int] = field(default_factory=dict)
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.vocabulary)})
        object.__setattr__(self, "_class_norms", np.linalg.norm(self.weights, axis=0))

    def word_index(self, word: Word) -> Optional[int]:
        return self._index.get(word)

    @property
    def class_norms(self) -> np.ndarray:
        return self._class_norms


@dataclass(frozen=True)
class Prediction:
    sample_id: int
    predicted: Optional[str]
    scores: Dict[str, float]
    status: str = "ok"  # ok | unclassifiable | fallback
    actual: Optional[str] = None

    @property
    def correct(self) -> bool:
        return self.predicted is not None and self.predicted == self.actual


def _check_window(wsize: int, wstep: int):
    if wsize < 1 or wstep < 1:
        raise InvalidParamsError(f"wsize and wstep must be >= 1, got wsize={wsize}, wstep={wstep}")


def window(s, wsize: int, wstep: int) -> List[Word]:
    """
    Words s[i:i+wsize] for i = 0, wstep, ... while i + wsize <= n.
    A string shorter than wsize yields itself as the only word.
    """
    _check_window(wsize, wstep)
    symbols = tuple(s.symbols if isinstance(s, SymbolString) else s)
    n = len(symbols)
    if n == 0:
        return []
    if n < wsize:
        return [symbols]
    return [symbols[i:i + wsize] for i in range(0, n - wsize + 1, wstep)]


def bag_of_words(s: SymbolString, wsize: int, wstep: int) -> BagOfWords:
    return BagOfWords(s.sample_id, s.label, dict(Counter(window(s, wsize, wstep))))


def build_corpus(bags: Sequence[BagOfWords]) -> Corpus:
    """One document per class: the summed word counts of that class's bags, keys in sorted label order."""
    if not bags:
        raise EmptyInputError("no bags of words to build a corpus from")
    docs: Dict[str, Counter] = {}
    for bag in bags:
        if bag.label is None:
            raise MissingLabelError(f"sample {bag.sample_id} has no label", hint="training needs labeled samples")
        docs.setdefault(bag.label, Counter()).update(bag.counts)
    if len(docs) < 2:
        raise SingleClassCorpusError(f"training data holds a single class ({next(iter(docs))!r})",
                                     hint="a vector space model needs at least two classes")
    return {label: docs[label] for label in sorted(docs)}


def fit_tfidf(corpus: Corpus) -> TfidfWeights:
    """
    W[j, i] = TF[i, j] * IDF[j] with
    TF[i, j] = count of word j in class i / total words in class i,
    IDF[j] = ln(|D| / number of classes containing word j).
    """
    labels = tuple(corpus)
    vocabulary = tuple(sorted({w for doc in corpus.values() for w in doc}))
    index = {w: j for j, w in enumerate(vocabulary)}

    counts = np.zeros((len(vocabulary), len(labels)), dtype=np.float64)
    for i, label in enumerate(labels):
        for w, c in corpus[label].items():
            counts[index[w], i] = c

    totals = counts.sum(axis=0)
    tf = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    df = np.count_nonzero(counts, axis=1)
    idf = np.log(len(labels) / df)
    weights = tf * idf[:, None]
    return TfidfWeights(vocabulary, labels, weights)


def frequency_vector(s: SymbolString, model: VsmModel) -> np.ndarray:
    """Raw word counts over the model vocabulary; unseen words are dropped."""
    w = np.zeros(len(model.vocabulary), dtype=np.float64)
    for word in window(s, model.wsize, model.wstep):
        j = model.word_index(word)
        if j is not None:
            w[j] += 1.0
    return w


def cosine_scores(w: np.ndarray, model: VsmModel) -> np.ndarray:
    """Cosine similarity of w with every class column; zero-norm classes score 0."""
    w_norm = float(np.linalg.norm(w))
    denom = w_norm * model.class_norms
    dots = w @ model.weights
    scores = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    return np.clip(scores, 0.0, 1.0)


def largest_class(model: VsmModel) -> str:
    """Largest training class, first in class order on ties."""
    return max(model.class_labels, key=lambda c: (model.class_sizes.get(c, 0), -model.class_labels.index(c)))


def classify(s: SymbolString, model: VsmModel, fallback: bool = False) -> Prediction:
    """
    Assign the class whose weight vector has the highest cosine similarity with
    the sample's frequency vector; ties go to the earlier class.

    Raises:
        UnclassifiableSampleError: no word of the sample is in the vocabulary and
            fallback is off
    """
    w = frequency_vector(s, model)
    if not np.any(w):
        if not fallback:
            raise UnclassifiableSampleError(
                f"sample {s.sample_id}: none of its words occur in the training vocabulary",
                sample_id=s.sample_id)
        zeros = {c: 0.0 for c in model.class_labels}
        return Prediction(s.sample_id, largest_class(model), zeros, "fallback", s.label)

    scores = cosine_scores(w, model)
    best = int(np.argmax(scores))
    return Prediction(
        s.sample_id,
        model.class_labels[best],
        {c: float(v) for c, v in zip(model.class_labels, scores)},
        "ok",
        s.label,
    )


def classify_many(strings: Sequence[SymbolString], model: VsmModel, fallback: bool = False) -> List[Prediction]:
    """Batch classify; unclassifiable samples become explicit rows instead of errors."""
    out = []
    for s in strings:
        try:
            out.append(classify(s, model, fallback))
        except UnclassifiableSampleError as e:
            logger.warning(e.message)
            out.append(Prediction(s.sample_id, None, {c: 0.0 for c in model.class_labels}, "unclassifiable", s.label))
    return out


def accuracy(predictions: Sequence[Prediction]) -> float:
    """Correctly classified / total; unclassifiable rows count as wrong."""
    if not predictions:
        return 0.0
    return sum(p.correct for p in predictions) / len(predictions)


def train_model(strings: Sequence[SymbolString], codebook: Codebook, wsize: int, wstep: int,
                rt: Optional[float] = None, metadata: Optional[dict] = None) -> VsmModel:
    """Windows, bags, corpus and TF-IDF over already symbolized training strings."""
    _check_window(wsize, wstep)
    bags = [bag_of_words(s, wsize, wstep) for s in strings]
    corpus = build_corpus(bags)
    tfidf = fit_tfidf(corpus)
    sizes = Counter(s.label for s in strings)
    model = VsmModel(
        vocabulary=tfidf.vocabulary,
        class_labels=tfidf.class_labels,
        weights=tfidf.weights,
        wsize=wsize,
        wstep=wstep,
        codebook=codebook,
        rt=rt,
        class_sizes={c: int(sizes[c]) for c in tfidf.class_labels},
        metadata=dict(metadata or {}),
    )
    zero_rows = int(np.count_nonzero(~model.weights.any(axis=1)))
    logger.info("vsm: %d words (%d shared by every class), %d classes", len(model.vocabulary), zero_rows,
                len(model.class_labels))
    return model


def document_sizes(model: VsmModel, strings: Sequence[SymbolString]) -> Dict[str, int]:
    """Total words per class document, for training summaries."""
    sizes = {c: 0 for c in model.class_labels}
    for s in strings:
        if s.label in sizes:
            sizes[s.label] += len(window(s, model.wsize, model.wstep))
    return sizes

