import numpy as np
import pytest

from src.compression.reducer import ReductionParams, Segment, SegmentSequence, reduce
from src.errors import EmptyInputError, InvalidParamsError
from src.symbolic.clustering import farthest_point_init, k_means, sorting_based
from src.symbolic.quantizer import (
    Codebook, fit_codebook, inverse_symbolize, render_string, render_symbol, symbolize,
)
from tests.conftest import TOY_LENGTH, ramp_dataset


def _toy_segments(**kw):
    ds = ramp_dataset(**kw)
    return [reduce(s, ReductionParams(0.1)) for s in ds.samples]


def test_sorting_based_groups_within_tolerance():
    points = np.array([[0.0, 0.0], [0.05, 0.0], [3.0, 0.0], [3.0, 0.08], [10.0, 10.0]])
    labels, centers = sorting_based(points, 0.1)
    assert labels.tolist() == [0, 0, 1, 1, 2]
    np.testing.assert_allclose(centers, [[0.025, 0.0], [3.0, 0.04], [10.0, 10.0]])


def test_sorting_based_measures_from_the_seed():
    # the third point is within ct of the second but not of the seed
    points = np.array([[0.0, 0.0], [0.0, 0.09], [0.0, 0.18]])
    labels, _ = sorting_based(points, 0.1)
    assert labels.tolist() == [0, 0, 1]


def test_sorting_based_rejects_bad_input():
    with pytest.raises(InvalidParamsError):
        sorting_based(np.zeros((3, 2)), 0.0)
    with pytest.raises(EmptyInputError):
        sorting_based(np.empty((0, 2)), 0.1)


def test_k_means_is_seeded():
    rng = np.random.Generator(np.random.PCG64(5))
    points = np.vstack([rng.normal(c, 0.1, (30, 2)) for c in ((0, 0), (3, 3), (-3, 3))])
    a = k_means(points, 3, seed=42)
    b = k_means(points, 3, seed=42)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert len(set(a[0].tolist())) == 3
    # each blob lands in a single cluster
    for blob in range(3):
        assert len(set(a[0][30 * blob:30 * (blob + 1)].tolist())) == 1


def test_k_means_caps_k_at_distinct_points():
    points = np.array([[1.0, 1.0]] * 5 + [[2.0, 2.0]] * 5)
    labels, centers = k_means(points, 8, seed=0)
    assert centers.shape == (2, 2)
    assert sorted(set(labels.tolist())) == [0, 1]


def test_farthest_point_init_spreads_out():
    points = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [0.0, 5.0]])
    centers = farthest_point_init(points, 3, seed=1)
    assert centers.shape == (3, 2)
    assert len({tuple(c) for c in centers}) == 3


def test_toy_codebook_has_two_symbols():
    seqs = _toy_segments()
    cb = fit_codebook(seqs, "sorting_based", {"ct": 0.1})
    assert cb.k == 2
    assert cb.sigma_len == 1.0  # every segment has the same length
    assert cb.sigma_inc == TOY_LENGTH - 1
    strings = [symbolize(s, cb) for s in seqs]
    by_label = {lab: {st.symbols for st in strings if st.label == lab} for lab in ("A", "B")}
    # the first pooled segment is an "A" ramp, so "A" gets symbol 0 on the size tie
    assert by_label == {"A": {(0,)}, "B": {(1,)}}


def test_larger_cluster_gets_the_first_symbol():
    seqs = _toy_segments()
    seqs = [s for s in seqs if s.label == "A"][:2] + [s for s in seqs if s.label == "B"]
    cb = fit_codebook(seqs, "k_means", {"csize": 2, "seed": 3})
    assert cb.k == 2
    assert symbolize(seqs[-1], cb).symbols == (0,)
    assert symbolize(seqs[0], cb).symbols == (1,)


def test_symbols_survive_increment_scaling():
    rng = np.random.Generator(np.random.PCG64(8))
    seqs = []
    for sid in range(20):
        n = int(rng.integers(2, 15))
        segs = tuple(Segment(int(ln), float(inc)) for ln, inc in zip(rng.integers(1, 6, n), rng.normal(0, 2, n)))
        seqs.append(SegmentSequence(sid, None, 0.0, segs, sum(s.len for s in segs) + 1))
    doubled = [SegmentSequence(q.sample_id, None, 0.0, tuple(Segment(s.len, 2 * s.inc) for s in q.segments),
                               q.original_length) for q in seqs]
    for method, params in (("sorting_based", {"ct": 0.3}), ("k_means", {"csize": 4, "seed": 0})):
        cb1 = fit_codebook(seqs, method, params)
        cb2 = fit_codebook(doubled, method, params)
        assert [symbolize(q, cb1).symbols for q in seqs] == [symbolize(q, cb2).symbols for q in doubled]


def test_fit_codebook_errors():
    with pytest.raises(EmptyInputError):
        fit_codebook([], "sorting_based", {"ct": 0.1})
    with pytest.raises(InvalidParamsError):
        fit_codebook(_toy_segments(), "dbscan", {})
    with pytest.raises(InvalidParamsError):
        fit_codebook(_toy_segments(), "k_means", {"csize": 0})


def test_codebook_validation():
    with pytest.raises(InvalidParamsError):
        Codebook(1.0, 1.0, ((0.0, 0.0),), (0, 1), "k_means")
    with pytest.raises(InvalidParamsError):
        Codebook(0.0, 1.0, ((0.0, 0.0),), (0,), "k_means")


def test_render():
    assert render_symbol(0) == "a"
    assert render_symbol(25) == "z"
    assert render_symbol(26) == "A"
    assert render_symbol(51) == "Z"
    assert render_symbol(52) == "s52"
    assert render_string([0, 1, 27]) == "abB"
    assert render_string([0, 60], sep=" ") == "a s60"


def test_inverse_symbolize_rebuilds_a_ramp():
    seqs = _toy_segments()
    cb = fit_codebook(seqs, "sorting_based", {"ct": 0.1})
    out = inverse_symbolize((0,), cb, y0=2.0)
    np.testing.assert_allclose(out.values, 2.0 + np.arange(TOY_LENGTH, dtype=float))
    with pytest.raises(EmptyInputError):
        inverse_symbolize((), cb, 0.0)


def test_inverse_symbolize_keeps_total_length():
    cb = Codebook(1.0, 1.0, ((1.4, 0.5),), (0,), "sorting_based", {"ct": 0.1})
    out = inverse_symbolize((0,) * 5, cb, 0.0)
    # 5 * 1.4 = 7 time steps once the rounding carry is spread out
    assert len(out) == 8
