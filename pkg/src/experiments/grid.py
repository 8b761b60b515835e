"""Hyperparameter grid search over the ABBA-VSM search space."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.config import ACCURACY_THRESHOLD, DEFAULT_SEARCH_SPACE, PipelineConfig
from src.errors import AbbaVsmError, EmptySearchSpaceError, InvalidParamsError
from src.experiments.pipeline import CompressionCache, evaluate
from src.ingest.ucr import Dataset

logger = logging.getLogger(__name__)

SEARCH_KEYS = ("rt", "ctype", "ct", "wsize", "wstep", "csize", "tsize")


@dataclass(frozen=True)
class SearchSpace:
    rt: Tuple[float, ...] = DEFAULT_SEARCH_SPACE["rt"]
    ctype: Tuple[str, ...] = DEFAULT_SEARCH_SPACE["ctype"]
    ct: Tuple[float, ...] = DEFAULT_SEARCH_SPACE["ct"]
    wsize: Tuple[int, ...] = DEFAULT_SEARCH_SPACE["wsize"]
    wstep: Tuple[int, ...] = DEFAULT_SEARCH_SPACE["wstep"]
    csize: Tuple[int, ...] = DEFAULT_SEARCH_SPACE["csize"]
    tsize: Tuple[float, ...] = DEFAULT_SEARCH_SPACE["tsize"]

    @classmethod
    def from_dict(cls, values: Mapping[str, Sequence]) -> "SearchSpace":
        unknown = set(values) - set(SEARCH_KEYS)
        if unknown:
            raise InvalidParamsError(f"unknown search keys: {', '.join(sorted(unknown))}")
        return cls(**{k: tuple(v) for k, v in values.items()})

    def knob(self, ctype: str) -> Tuple[str, Tuple]:
        """The clustering parameter that varies for ctype."""
        return ("ct", self.ct) if ctype == "sorting_based" else ("csize", self.csize)


def count_configs(space: SearchSpace) -> int:
    shared = len(space.rt) * len(space.wsize) * len(space.wstep) * len(space.tsize)
    return sum(shared * len(space.knob(c)[1]) for c in space.ctype)


def enumerate_configs(space: SearchSpace, base: Optional[PipelineConfig] = None) -> Iterator[PipelineConfig]:
    """
    Configs in a fixed order: ctype, rt, ct|csize, wsize, wstep, tsize (last varies fastest).

    Raises:
        EmptySearchSpaceError: the cross product is empty
    """
    if count_configs(space) == 0:
        raise EmptySearchSpaceError("the search space is empty",
                                    hint="every hyperparameter needs at least one value")
    base = base or PipelineConfig()
    for ctype in space.ctype:
        name, values = space.knob(ctype)
        for rt in space.rt:
            for knob in values:
                for wsize in space.wsize:
                    for wstep in space.wstep:
                        for tsize in space.tsize:
                            yield replace(base, ctype=ctype, rt=rt, wsize=wsize, wstep=wstep, tsize=tsize,
                                          **{name: knob})


@dataclass
class GridRow:
    index: int
    config: Dict[str, object]
    status: str = "ok"
    accuracy: Optional[float] = None
    mean_cr: Optional[float] = None
    mean_segment_fraction: Optional[float] = None
    unclassifiable: int = 0
    alphabet_size: int = 0
    train_seconds: float = 0.0
    test_seconds: float = 0.0
    compressor_seconds: float = 0.0
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class GridResult:
    rows: List[GridRow]
    threshold: float
    passed: int
    best: Optional[PipelineConfig]
    sensitivity: Dict[str, Dict[str, Dict[str, int]]] = field(default_factory=dict)
    train_seconds_by_ctype: Dict[str, float] = field(default_factory=dict)

    @property
    def best_row(self) -> Optional[GridRow]:
        return self.rows[0] if self.rows and self.rows[0].accuracy is not None else None

    def to_dict(self) -> dict:
        return {
            "evaluated": len(self.rows),
            "threshold": self.threshold,
            "passed": self.passed,
            "best": self.best.hyperparameters() if self.best else None,
            "best_row": self.best_row.to_dict() if self.best_row else None,
            "sensitivity": self.sensitivity,
            "train_seconds_by_ctype": self.train_seconds_by_ctype,
        }


class _Evaluator:
    """Runs one config against fixed data, reusing reductions across configs with equal rt."""

    def __init__(self, ds: Dataset, test_ds: Optional[Dataset] = None):
        self.ds = ds
        self.test_ds = test_ds
        self.cache = CompressionCache()

    def __call__(self, item: Tuple[int, PipelineConfig]) -> GridRow:
        index, config = item
        row = GridRow(index, config.hyperparameters())
        try:
            report = evaluate(self.ds, config, self.test_ds, self.cache)
        except AbbaVsmError as e:
            row.status, row.error = e.code, e.message
            return row
        row.accuracy = report.accuracy
        row.mean_cr = report.mean_cr
        row.mean_segment_fraction = report.mean_segment_fraction
        row.unclassifiable = report.unclassifiable
        row.alphabet_size = report.alphabet_size
        row.train_seconds = report.train_seconds
        row.test_seconds = report.test_seconds
        row.compressor_seconds = report.compressor_seconds
        return row


_worker: Optional[_Evaluator] = None


def _init_worker(ds: Dataset, test_ds: Optional[Dataset]):
    global _worker
    _worker = _Evaluator(ds, test_ds)


def _run_in_worker(item: Tuple[int, PipelineConfig]) -> GridRow:
    return _worker(item)


def _sort_key(row: GridRow):
    acc = row.accuracy if row.accuracy is not None else -1.0
    cr = row.mean_cr if row.mean_cr is not None else float("-inf")
    return (-acc, -cr)


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def sensitivity_summary(rows: Sequence[GridRow], threshold: float) -> Dict[str, Dict[str, Dict[str, int]]]:
    """Per hyperparameter and value: configs reaching the threshold out of those evaluated."""
    out: Dict[str, Dict[str, Dict[str, int]]] = {}
    for row in rows:
        ok = row.accuracy is not None and row.accuracy >= threshold
        for key, value in row.config.items():
            cell = out.setdefault(key, {}).setdefault(_fmt(value), {"passed": 0, "total": 0})
            cell["total"] += 1
            cell["passed"] += int(ok)
    return out


def grid_search(ds: Dataset, space: SearchSpace, base: Optional[PipelineConfig] = None,
                budget: Optional[int] = None, threshold: float = ACCURACY_THRESHOLD,
                workers: int = 1, test_ds: Optional[Dataset] = None) -> GridResult:
    """
    Evaluate every config of the space (or the first `budget` of them) with a fixed seed.

    Rows come back sorted by accuracy, then mean CR, both descending; ties keep
    enumeration order. Configs whose split is infeasible stay in the table with
    their error code and no accuracy.
    """
    if budget is not None and budget < 1:
        raise InvalidParamsError(f"budget must be >= 1, got {budget}")
    if workers < 1:
        raise InvalidParamsError(f"workers must be >= 1, got {workers}")
    configs = list(enumerate_configs(space, base))
    if budget is not None:
        configs = configs[:budget]
    items = list(enumerate(configs))
    logger.info("grid search on %s: %d configs, %d worker(s)", ds.name, len(items), workers)

    if workers == 1:
        run = _Evaluator(ds, test_ds)
        rows = [run(item) for item in items]
    else:
        chunk = max(1, len(items) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ds, test_ds)) as pool:
            rows = list(pool.map(_run_in_worker, items, chunksize=chunk))

    failed = [r for r in rows if r.accuracy is None]
    if failed:
        logger.warning("%d of %d configs could not be evaluated (first: %s)", len(failed), len(rows), failed[0].error)

    ranked = sorted(rows, key=_sort_key)
    passed = sum(1 for r in rows if r.accuracy is not None and r.accuracy >= threshold)
    best = configs[ranked[0].index] if ranked and ranked[0].accuracy is not None else None

    by_ctype: Dict[str, List[float]] = {}
    for r in rows:
        if r.accuracy is not None:
            by_ctype.setdefault(str(r.config["ctype"]), []).append(r.train_seconds)

    return GridResult(
        rows=ranked,
        threshold=threshold,
        passed=passed,
        best=best,
        sensitivity=sensitivity_summary(rows, threshold),
        train_seconds_by_ctype={c: float(np.mean(v)) for c, v in sorted(by_ctype.items())},
    )
