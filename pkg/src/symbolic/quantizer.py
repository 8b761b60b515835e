"""Segment normalization, codebook fitting and symbolization (the classifier's first step)."""
import logging
import math
import string
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.compression.reducer import Segment, SegmentSequence, reconstruct
from src.errors import EmptyInputError, InvalidParamsError
from src.ingest.ucr import TimeSeriesSample
from src.symbolic.clustering import k_means, sorting_based

logger = logging.getLogger(__name__)

METHODS = ("sorting_based", "k_means")
_LETTERS = string.ascii_lowercase + string.ascii_uppercase


@dataclass(frozen=True)
class Codebook:
    sigma_len: float
    sigma_inc: float
    centers: Tuple[Tuple[float, float], ...]
    alphabet: Tuple[int, ...]
    method: str
    method_params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.centers) != len(self.alphabet) or not self.centers:
            raise InvalidParamsError("a codebook needs one symbol per center and at least one center")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InvalidParamsError("codebook alphabet entries must be distinct")
        for s in (self.sigma_len, self.sigma_inc):
            if not (math.isfinite(s) and s > 0):
                raise InvalidParamsError(f"normalization scale must be finite and > 0, got {s!r}")

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=np.float64).reshape(-1, 2)

    def normalize(self, lengths: np.ndarray, increments: np.ndarray) -> np.ndarray:
        return np.column_stack([lengths / self.sigma_len, increments / self.sigma_inc])


@dataclass(frozen=True)
class SymbolString:
    sample_id: int
    label: Optional[str]
    symbols: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.symbols)


def render_symbol(symbol: int) -> str:
    """a-z, then A-Z, then s<k>."""
    if 0 <= symbol < len(_LETTERS):
        return _LETTERS[symbol]
    return f"s{symbol}"


def render_string(symbols: Sequence[int], sep: str = "") -> str:
    return sep.join(render_symbol(s) for s in symbols)


def _scale(values: np.ndarray) -> float:
    # population std, 1 when degenerate
    sd = float(np.std(values))
    return sd if math.isfinite(sd) and sd > 0 else 1.0


def fit_codebook(seqs: Sequence[SegmentSequence], method: str, method_params: Dict[str, Any]) -> Codebook:
    """
    Pool all training segments, normalize by population std, cluster, then
    number clusters by descending size (ties: earliest pooled segment first).
    """
    if method not in METHODS:
        raise InvalidParamsError(f"unknown clustering method {method!r}")
    lengths = np.concatenate([s.lengths for s in seqs]) if seqs else np.empty(0)
    if lengths.size == 0:
        raise EmptyInputError("no training segments to build a codebook from")
    increments = np.concatenate([s.increments for s in seqs])

    sigma_len, sigma_inc = _scale(lengths), _scale(increments)
    points = np.column_stack([lengths / sigma_len, increments / sigma_inc])

    if method == "sorting_based":
        ct = float(method_params.get("ct", 0))
        if not ct > 0:
            raise InvalidParamsError(f"ct must be > 0, got {ct!r}")
        labels, centers = sorting_based(points, ct)
        params = {"ct": ct}
    else:
        csize = int(method_params.get("csize", 0))
        if csize < 1:
            raise InvalidParamsError(f"csize must be >= 1, got {csize!r}")
        seed = int(method_params.get("seed", 0))
        labels, centers = k_means(points, csize, seed)
        params = {"csize": csize, "seed": seed}

    k = centers.shape[0]
    sizes = np.bincount(labels, minlength=k)
    first_seen = np.full(k, labels.size, dtype=np.int64)
    for idx in range(labels.size - 1, -1, -1):
        first_seen[labels[idx]] = idx
    order = sorted(range(k), key=lambda c: (-int(sizes[c]), int(first_seen[c])))

    cb = Codebook(
        sigma_len=sigma_len,
        sigma_inc=sigma_inc,
        centers=tuple((float(centers[c, 0]), float(centers[c, 1])) for c in order),
        alphabet=tuple(range(k)),
        method=method,
        method_params=params,
    )
    logger.info("codebook: %d symbols from %d segments (%s %s)", k, lengths.size, method, params)
    return cb


def assign(points: np.ndarray, cb: Codebook) -> np.ndarray:
    """Index of the nearest center per point; ties go to the lower index."""
    centers = cb.center_array
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def symbolize(seq: SegmentSequence, cb: Codebook) -> SymbolString:
    """Replace each segment by the symbol of its nearest trained center."""
    if not seq.segments:
        return SymbolString(seq.sample_id, seq.label, ())
    idx = assign(cb.normalize(seq.lengths, seq.increments), cb)
    return SymbolString(seq.sample_id, seq.label, tuple(cb.alphabet[i] for i in idx))


def inverse_symbolize(symbols: Sequence[int], cb: Codebook, y0: float,
                      sample_id: int = 0, label: Optional[str] = None) -> TimeSeriesSample:
    """
    Rebuild a series from symbols alone: each symbol becomes its de-normalized
    center, lengths are rounded with the rounding error carried forward.
    """
    if not symbols:
        raise EmptyInputError("cannot invert an empty symbol string")
    pos = {s: i for i, s in enumerate(cb.alphabet)}
    segments: List[Segment] = []
    carry = 0.0
    for s in symbols:
        c_len, c_inc = cb.centers[pos[s]]
        exact = c_len * cb.sigma_len + carry
        ln = max(1, int(round(exact)))
        carry = exact - ln
        segments.append(Segment(ln, c_inc * cb.sigma_inc))
    total = sum(seg.len for seg in segments)
    seq = SegmentSequence(sample_id, label, float(y0), tuple(segments), total + 1)
    return reconstruct(seq)
