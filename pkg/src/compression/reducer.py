"""Adaptive piecewise-linear reduction (the compressor side)."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.errors import InvalidInputError, InvalidParamsError
from src.ingest.ucr import TimeSeriesSample

logger = logging.getLogger(__name__)

BYTES_PER_FLOAT = 4
BYTES_PER_SYMBOL = 1


@dataclass(frozen=True)
class Segment:
    len: int
    inc: float


@dataclass(frozen=True)
class SegmentSequence:
    sample_id: int
    label: Optional[str]
    y0: float
    segments: Tuple[Segment, ...]
    original_length: int

    def check(self) -> "SegmentSequence":
        """Raise InvalidInputError unless the tiling invariants hold."""
        if self.original_length < 2:
            raise InvalidInputError(f"sample {self.sample_id}: original_length must be >= 2")
        if not self.segments:
            raise InvalidInputError(f"sample {self.sample_id}: no segments")
        if not math.isfinite(self.y0):
            raise InvalidInputError(f"sample {self.sample_id}: y0 is not finite")
        for seg in self.segments:
            if int(seg.len) != seg.len or seg.len < 1 or not math.isfinite(seg.inc):
                raise InvalidInputError(f"sample {self.sample_id}: bad segment {seg}")
        total = sum(seg.len for seg in self.segments)
        if total != self.original_length - 1:
            raise InvalidInputError(
                f"sample {self.sample_id}: segment lengths sum to {total}, expected {self.original_length - 1}")
        return self

    @property
    def lengths(self) -> np.ndarray:
        return np.array([s.len for s in self.segments], dtype=np.float64)

    @property
    def increments(self) -> np.ndarray:
        return np.array([s.inc for s in self.segments], dtype=np.float64)


@dataclass(frozen=True)
class ReductionParams:
    rt: float

    def __post_init__(self):
        if not (math.isfinite(self.rt) and self.rt > 0):
            raise InvalidParamsError(f"reduction tolerance must be finite and > 0, got {self.rt!r}")


def reduce(sample: TimeSeriesSample, params: ReductionParams) -> SegmentSequence:
    """
    Greedy left-to-right segmentation.

    From anchor i the end j grows one step at a time while the line through
    (i, y_i) and (j, y_j) keeps sum((yhat_k - y_k)^2, k=i..j) <= (j - i) * rt^2.
    The first violation closes the segment at the previous j.

    Running sums of d_k = y_k - y_i and k' * d_k (k' = k - i) make every
    extension O(1):  err = S_dd - 2 s S_kd + s^2 sum(k'^2),  s = d_j / L.
    """
    y = sample.values
    n = y.shape[0]
    if n < 2:
        raise InvalidInputError(f"sample {sample.sample_id}: need at least 2 values, got {n}")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError(f"sample {sample.sample_id}: values must be finite")

    tol2 = params.rt * params.rt
    ys = y.tolist()
    segments: List[Segment] = []
    i = 0
    while i < n - 1:
        base = ys[i]
        d = ys[i + 1] - base
        s_dd = d * d          # sum of d_k^2 over the window (d_i = 0)
        s_kd = d              # sum of k' * d_k
        j = i + 1
        while j + 1 < n:
            d_next = ys[j + 1] - base
            length = j + 1 - i
            cand_dd = s_dd + d_next * d_next
            cand_kd = s_kd + length * d_next
            slope = d_next / length
            sum_k2 = length * (length + 1) * (2 * length + 1) / 6.0
            err = cand_dd - 2.0 * slope * cand_kd + slope * slope * sum_k2
            if err > length * tol2:
                break
            s_dd, s_kd = cand_dd, cand_kd
            j += 1
        segments.append(Segment(j - i, ys[j] - ys[i]))
        i = j

    return SegmentSequence(sample.sample_id, sample.label, float(ys[0]), tuple(segments), n)


def reconstruct(seq: SegmentSequence) -> TimeSeriesSample:
    """Polygonal chain through the segment endpoints, one point per time step."""
    out = [seq.y0]
    current = seq.y0
    for seg in seq.segments:
        for t in range(1, seg.len):
            out.append(current + seg.inc * (t / seg.len))
        current = current + seg.inc
        out.append(current)
    return TimeSeriesSample(seq.sample_id, np.array(out, dtype=np.float64), seq.label)


def compression_ratio(seq: SegmentSequence, symbol_count: Optional[int] = None) -> float:
    """1 - compressed bytes / original bytes, one byte per symbol and four per float."""
    n = len(seq.segments) if symbol_count is None else symbol_count
    return 1.0 - (n * BYTES_PER_SYMBOL) / (seq.original_length * BYTES_PER_FLOAT)


def segment_fraction(seq: SegmentSequence) -> float:
    """n / (N - 1): 1.0 means no reduction at all."""
    return len(seq.segments) / (seq.original_length - 1)


def reconstruction_error(sample: TimeSeriesSample, seq: SegmentSequence) -> float:
    """Euclidean distance between the raw series and its polygonal chain."""
    approx = reconstruct(seq).values
    if approx.shape != sample.values.shape:
        raise InvalidInputError(f"sample {sample.sample_id}: length mismatch with its segments")
    return float(np.linalg.norm(sample.values - approx))


def segment_error(values: np.ndarray, start: int, end: int) -> float:
    """Direct squared error of the endpoint line over [start, end]; used for checks."""
    k = np.arange(start, end + 1, dtype=np.float64)
    slope = (values[end] - values[start]) / (end - start)
    line = values[start] + slope * (k - start)
    return float(np.sum((line - values[start:end + 1]) ** 2))
