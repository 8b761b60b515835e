"""End-to-end ABBA-VSM runs: compress on the device side, train/predict on the edge side."""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.classification.vsm import (
    Prediction, VsmModel, accuracy, classify_many, document_sizes, train_model,
)
from src.compression.reducer import (
    ReductionParams, SegmentSequence, compression_ratio, reduce, reconstruction_error, segment_fraction,
)
from src.config import PipelineConfig
from src.errors import EmptyDatasetError, MissingLabelError
from src.i_o.wire import WireHeader, WireStats, check_rt, decode_segments, encode_segments, read_segments, SUFFIX
from src.ingest.ucr import Dataset, SplitSpec, load_ucr, stratified_split, znormalize
from src.symbolic.quantizer import Codebook, fit_codebook, inverse_symbolize, render_string, symbolize

logger = logging.getLogger(__name__)

CR_NOTE = ("compression_ratio follows the 1-byte-per-symbol / 4-bytes-per-float model and cannot fall "
           "below 0.75 while segments <= points; use mean_segment_fraction for reduction trends")


@dataclass
class CompressedDataset:
    """A dataset reduced at one tolerance, keyed by sample_id."""
    dataset: Dataset
    rt: float
    segments: Dict[int, SegmentSequence]
    seconds: float

    def ordered(self, sample_ids: Optional[Sequence[int]] = None) -> List[SegmentSequence]:
        ids = [s.sample_id for s in self.dataset.samples] if sample_ids is None else sample_ids
        return [self.segments[i] for i in ids]

    def mean_cr(self) -> float:
        return float(np.mean([compression_ratio(s) for s in self.segments.values()]))

    def mean_segment_fraction(self) -> float:
        return float(np.mean([segment_fraction(s) for s in self.segments.values()]))

    def mean_reconstruction_error(self) -> float:
        return float(np.mean([reconstruction_error(x, self.segments[x.sample_id]) for x in self.dataset.samples]))


def compress(ds: Dataset, rt: float) -> CompressedDataset:
    """Reduce every sample of ds; the wall time is the compressor-side cost."""
    if not ds.samples:
        raise EmptyDatasetError(f"{ds.name} has no samples")
    params = ReductionParams(rt)
    t0 = time.perf_counter()
    segments = {s.sample_id: reduce(s, params) for s in ds.samples}
    seconds = time.perf_counter() - t0
    return CompressedDataset(ds, rt, segments, seconds)


class CompressionCache:
    """Reductions per (dataset object, rt); grid search reuses them across configs."""

    def __init__(self):
        self._store: Dict[Tuple[int, float], CompressedDataset] = {}

    def get(self, ds: Dataset, rt: float) -> CompressedDataset:
        key = (id(ds), float(rt))
        hit = self._store.get(key)
        if hit is None or hit.dataset is not ds:
            hit = compress(ds, rt)
            self._store[key] = hit
        return hit


def load_input(path: str, rt: Optional[float], labeled: bool = True, znorm: bool = False,
               delimiter: str = "auto") -> Tuple[List[SegmentSequence], str, float]:
    """
    Segments from either a .abbaseg stream or a raw dataset reduced with rt.

    Returns:
        (segments, dataset name, the tolerance the segments were reduced with)
    """
    if path.endswith(SUFFIX):
        seqs, header = read_segments(path)
        check_rt(header, rt)
        return seqs, header.dataset_name, header.rt
    ds = load_ucr(path, delimiter=delimiter, labeled=labeled)
    if znorm:
        ds = znormalize(ds)
    return compress(ds, rt).ordered(), ds.name, rt


@dataclass
class TrainSummary:
    vocabulary_size: int
    alphabet_size: int
    class_sizes: Dict[str, int]
    document_sizes: Dict[str, int]
    seconds: float
    top_words: Dict[str, List[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "vocabulary_size": self.vocabulary_size,
            "alphabet_size": self.alphabet_size,
            "class_sizes": self.class_sizes,
            "document_sizes": self.document_sizes,
            "top_words": self.top_words,
            "seconds": self.seconds,
        }


def top_words(model: VsmModel, n: int = 3) -> Dict[str, List[str]]:
    """Highest-weighted words per class as letter strings; zero weights are left out."""
    out = {}
    for col, label in enumerate(model.class_labels):
        column = model.weights[:, col]
        order = np.argsort(-column, kind="stable")[:n]
        out[label] = [render_string(model.vocabulary[i]) for i in order if column[i] > 0]
    return out


def symbolic_error(values: np.ndarray, symbols: Sequence[int], cb: Codebook, y0: float) -> float:
    """
    Euclidean distance between a raw series and its rebuild from symbols alone.
    The rebuild is cut, or padded with its last value, to the raw length.
    """
    rebuilt = inverse_symbolize(symbols, cb, y0).values
    n = values.shape[0]
    if rebuilt.shape[0] < n:
        rebuilt = np.concatenate([rebuilt, np.full(n - rebuilt.shape[0], rebuilt[-1])])
    return float(np.linalg.norm(rebuilt[:n] - values))


def train(seqs: Sequence[SegmentSequence], config: PipelineConfig,
          dataset_name: str = "") -> Tuple[VsmModel, TrainSummary]:
    """Codebook on pooled segments, symbolize, window, corpus, TF-IDF."""
    if not seqs:
        raise EmptyDatasetError("no training samples")
    unlabeled = [s.sample_id for s in seqs if s.label is None]
    if unlabeled:
        raise MissingLabelError(f"{len(unlabeled)} training sample(s) have no label (first: {unlabeled[0]})",
                                hint="train needs a labeled dataset or stream")
    t0 = time.perf_counter()
    codebook = fit_codebook(seqs, config.ctype, config.clustering_params())
    strings = [symbolize(s, codebook) for s in seqs]
    meta = {"dataset_name": dataset_name, "seed": config.seed, "config": config.hyperparameters()}
    model = train_model(strings, codebook, config.wsize, config.wstep, rt=config.rt, metadata=meta)
    seconds = time.perf_counter() - t0
    summary = TrainSummary(
        vocabulary_size=len(model.vocabulary),
        alphabet_size=codebook.k,
        class_sizes=dict(model.class_sizes),
        document_sizes=document_sizes(model, strings),
        seconds=seconds,
        top_words=top_words(model),
    )
    return model, summary


def predict(model: VsmModel, seqs: Sequence[SegmentSequence], fallback: bool = False) -> Tuple[List[Prediction], float]:
    t0 = time.perf_counter()
    strings = [symbolize(s, model.codebook) for s in seqs]
    preds = classify_many(strings, model, fallback)
    return preds, time.perf_counter() - t0


def _through_wire(seqs: Sequence[SegmentSequence], name: str, rt: float) -> Tuple[List[SegmentSequence], WireStats, float]:
    """Encode on the device side, decode on the edge side; returns decode time separately."""
    payload, stats = encode_segments(seqs, WireHeader(name, rt))
    t0 = time.perf_counter()
    decoded, _ = decode_segments(payload.decode("utf-8").splitlines(), source=name)
    return decoded, stats, time.perf_counter() - t0


def _merge_stats(a: WireStats, b: WireStats) -> WireStats:
    return WireStats(
        bytes_written=a.bytes_written + b.bytes_written,
        raw_equivalent_bytes=a.raw_equivalent_bytes + b.raw_equivalent_bytes,
        segment_payload_bytes=a.segment_payload_bytes + b.segment_payload_bytes,
        sample_count=a.sample_count + b.sample_count,
        segment_count=a.segment_count + b.segment_count,
    )


@dataclass
class EvalReport:
    dataset: str
    config: Dict[str, object]
    seed: int
    accuracy: float
    correct: int
    total: int
    unclassifiable: int
    fallback: int
    mean_cr: float
    mean_segment_fraction: float
    mean_reconstruction_error: float
    mean_symbolic_error: float
    alphabet_size: int
    vocabulary_size: int
    compressor_seconds: float
    classifier_seconds: float
    train_seconds: float
    test_seconds: float
    total_seconds: float
    wire: Dict[str, object]
    class_labels: Tuple[str, ...] = ()
    predictions: List[Prediction] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "predictions"}
        out["class_labels"] = list(self.class_labels)
        out["notes"] = [CR_NOTE]
        return out


def evaluate(ds: Dataset, config: PipelineConfig, test_ds: Optional[Dataset] = None,
             cache: Optional[CompressionCache] = None) -> EvalReport:
    """
    Split (or take test_ds), compress everything, train on the train part and
    classify the test part.

    Wall times: compressor phase = reduction + stream encoding, classifier phase =
    stream decoding + training + testing.
    """
    cache = cache or CompressionCache()
    if test_ds is None:
        train_part, test_part = stratified_split(ds, SplitSpec(config.tsize, config.seed))
        compressed = [cache.get(ds, config.rt)]
        train_src, test_src = compressed[0], compressed[0]
    else:
        train_part, test_part = ds, test_ds
        compressed = [cache.get(ds, config.rt), cache.get(test_ds, config.rt)]
        train_src, test_src = compressed

    t_start = time.perf_counter()
    train_seqs = train_src.ordered([s.sample_id for s in train_part.samples])
    test_seqs = test_src.ordered([s.sample_id for s in test_part.samples])

    t0 = time.perf_counter()
    train_seqs, train_wire, decode_train = _through_wire(train_seqs, train_part.name, config.rt)
    test_seqs, test_wire, decode_test = _through_wire(test_seqs, test_part.name, config.rt)
    encode_seconds = time.perf_counter() - t0 - decode_train - decode_test

    model, summary = train(train_seqs, config, ds.name)
    preds, test_seconds = predict(model, test_seqs, config.fallback)
    # cached reductions count with the time they took when they were made
    compressor_seconds = sum(c.seconds for c in compressed) + encode_seconds
    train_seconds = summary.seconds + decode_train
    test_seconds = test_seconds + decode_test
    classifier_seconds = train_seconds + test_seconds
    total_seconds = compressor_seconds + (time.perf_counter() - t_start - encode_seconds)

    # outside the timed phases: rebuild each test series from its symbols alone
    sym_errors = [symbolic_error(raw.values, symbolize(seq, model.codebook).symbols, model.codebook, seq.y0)
                  for raw, seq in zip(test_part.samples, test_seqs) if seq.segments]

    correct = sum(p.correct for p in preds)
    report = EvalReport(
        dataset=ds.name,
        config=config.hyperparameters(),
        seed=config.seed,
        accuracy=accuracy(preds),
        correct=correct,
        total=len(preds),
        unclassifiable=sum(p.status == "unclassifiable" for p in preds),
        fallback=sum(p.status == "fallback" for p in preds),
        mean_cr=float(np.mean([c.mean_cr() for c in compressed])),
        mean_segment_fraction=float(np.mean([c.mean_segment_fraction() for c in compressed])),
        mean_reconstruction_error=float(np.mean([c.mean_reconstruction_error() for c in compressed])),
        mean_symbolic_error=float(np.mean(sym_errors)) if sym_errors else 0.0,
        alphabet_size=summary.alphabet_size,
        vocabulary_size=summary.vocabulary_size,
        compressor_seconds=compressor_seconds,
        classifier_seconds=classifier_seconds,
        train_seconds=train_seconds,
        test_seconds=test_seconds,
        total_seconds=total_seconds,
        wire=_merge_stats(train_wire, test_wire).to_dict(),
        class_labels=model.class_labels,
        predictions=preds,
    )
    logger.info("evaluated %s: accuracy %.3f, mean CR %.3f", ds.name, report.accuracy, report.mean_cr)
    return report


def rt_sweep(ds: Dataset, rts: Sequence[float]) -> List[Dict[str, float]]:
    """Mean CR and segment fraction of the whole dataset per tolerance, ascending rt."""
    rows = []
    for rt in sorted(rts):
        c = compress(ds, rt)
        rows.append({"rt": rt, "mean_cr": c.mean_cr(), "mean_segment_fraction": c.mean_segment_fraction()})
    return rows
