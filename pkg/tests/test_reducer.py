import time

import numpy as np
import pytest

from src.compression.reducer import (
    ReductionParams, Segment, SegmentSequence, compression_ratio, reconstruct, reconstruction_error, reduce,
    segment_error, segment_fraction,
)
from src.config import DEFAULT_SEARCH_SPACE
from src.errors import InvalidInputError, InvalidParamsError
from src.ingest.ucr import TimeSeriesSample


def _bounds(seq):
    start = 0
    for seg in seq.segments:
        yield start, start + seg.len
        start += seg.len


def _slack(values, start, end):
    # float noise of the running sums grows with the window's energy
    d = values[start:end + 1] - values[start]
    return 1e-9 * (1.0 + float(np.sum(d * d)))


def test_ramp_is_one_segment():
    seq = reduce(TimeSeriesSample(0, np.arange(20, dtype=float) * 0.5 + 3.0, "A"), ReductionParams(0.1))
    assert seq.segments == (Segment(19, 9.5),)
    assert seq.y0 == 3.0
    assert seq.label == "A"
    assert seq.original_length == 20


def test_two_points():
    seq = reduce(TimeSeriesSample(4, [1.0, -2.0]), ReductionParams(0.01))
    assert seq.segments == (Segment(1, -3.0),)


def test_corner_splits_the_series():
    y = np.concatenate([np.arange(10.0), 9.0 - np.arange(1.0, 10.0)])
    seq = reduce(TimeSeriesSample(0, y), ReductionParams(0.01))
    assert [s.len for s in seq.segments] == [9, 9]
    assert [s.inc for s in seq.segments] == [9.0, -9.0]


@pytest.mark.parametrize("rt", [0.0, -0.1, float("nan"), float("inf")])
def test_invalid_tolerance(rt):
    with pytest.raises(InvalidParamsError):
        ReductionParams(rt)


@pytest.mark.parametrize("values", [[1.0], [0.0, float("nan"), 1.0], [0.0, float("inf")]])
def test_invalid_series(values):
    with pytest.raises(InvalidInputError):
        reduce(TimeSeriesSample(0, values), ReductionParams(0.1))


def test_error_budget_and_tiling(random_samples):
    t0 = time.perf_counter()
    for rt in (0.01, 0.1, 0.5):
        params = ReductionParams(rt)
        for sample in random_samples:
            seq = reduce(sample, params).check()
            assert sum(s.len for s in seq.segments) == len(sample) - 1
            for start, end in _bounds(seq):
                budget = (end - start) * rt * rt
                assert segment_error(sample.values, start, end) <= budget + _slack(sample.values, start, end)
    assert time.perf_counter() - t0 < 10.0


def test_segments_are_maximal(random_samples):
    rt = 0.1
    for sample in random_samples[:50]:
        seq = reduce(sample, ReductionParams(rt))
        for start, end in list(_bounds(seq))[:-1]:
            longer = segment_error(sample.values, start, end + 1)
            assert longer > (end + 1 - start) * rt * rt - _slack(sample.values, start, end + 1)


def test_larger_tolerance_gives_fewer_segments(random_samples):
    rts = sorted(DEFAULT_SEARCH_SPACE["rt"])
    crs = []
    per_series = [[reduce(s, ReductionParams(rt)) for rt in rts] for s in random_samples]
    for sample, seqs in zip(random_samples, per_series):
        counts = [len(q.segments) for q in seqs]
        assert all(a >= b for a, b in zip(counts, counts[1:])), (sample.sample_id, counts)
    for col in range(len(rts)):
        crs.append(np.mean([compression_ratio(seqs[col]) for seqs in per_series]))
    assert all(a <= b for a, b in zip(crs, crs[1:]))


def test_reconstruct_hits_every_endpoint(random_samples):
    for sample in random_samples[:40]:
        seq = reduce(sample, ReductionParams(0.1))
        approx = reconstruct(seq).values
        assert approx.shape == sample.values.shape
        scale = 1.0 + np.abs(sample.values).max()
        ends = [0] + [end for _, end in _bounds(seq)]
        np.testing.assert_allclose(approx[ends], sample.values[ends], rtol=0, atol=1e-9 * scale)


def test_reconstruction_error_is_bounded_by_tolerance(random_samples):
    rt = 0.1
    for sample in random_samples[:40]:
        seq = reduce(sample, ReductionParams(rt))
        assert reconstruction_error(sample, seq) <= rt * np.sqrt(len(sample) - 1) * (1 + 1e-6) + 1e-9


def test_compression_ratio_and_fraction():
    seq = SegmentSequence(0, None, 0.0, (Segment(19, 1.0),), 20)
    assert compression_ratio(seq) == 1.0 - 1.0 / 80.0
    assert segment_fraction(seq) == 1.0 / 19.0
    full = SegmentSequence(0, None, 0.0, tuple(Segment(1, 0.0) for _ in range(19)), 20)
    assert segment_fraction(full) == 1.0
    # the byte model never drops below 0.75
    assert compression_ratio(full) > 0.75


def test_check_rejects_broken_tilings():
    with pytest.raises(InvalidInputError):
        SegmentSequence(0, None, 0.0, (Segment(3, 1.0),), 5).check()
    with pytest.raises(InvalidInputError):
        SegmentSequence(0, None, 0.0, (Segment(0, 1.0), Segment(4, 1.0)), 5).check()
    with pytest.raises(InvalidInputError):
        SegmentSequence(0, None, float("nan"), (Segment(4, 1.0),), 5).check()
