"""UCR-archive style dataset loading, writing and stratified splitting."""
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    DatasetIOError, EmptyDatasetError, FormatError, InvalidParamsError,
    MissingLabelError, SplitInfeasibleError,
)

logger = logging.getLogger(__name__)

DELIMITERS = {"tab": "\t", "comma": ",", "whitespace": None}

# ceil() slack so that e.g. 0.3 * 10 counts as 3, not 4
_CEIL_EPS = 1e-9


@dataclass(eq=False)
class TimeSeriesSample:
    """One univariate series. Timestamps are implicit indices 0..N-1."""
    sample_id: int
    values: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise FormatError(f"sample {self.sample_id}: values must be one-dimensional")

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(eq=False)
class Dataset:
    name: str
    samples: List[TimeSeriesSample]
    class_labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.class_labels:
            self.class_labels = tuple(sorted({s.label for s in self.samples if s.label is not None}))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labeled(self) -> bool:
        return bool(self.samples) and all(s.label is not None for s in self.samples)

    def class_counts(self) -> Dict[str, int]:
        counts = {c: 0 for c in self.class_labels}
        for s in self.samples:
            if s.label is not None:
                counts[s.label] = counts.get(s.label, 0) + 1
        return counts


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise InvalidParamsError(f"test_fraction must lie in (0, 1), got {self.test_fraction!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParamsError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


def _detect_delimiter(line: str) -> Optional[str]:
    if "\t" in line:
        return "\t"
    if "," in line:
        return ","
    return None


def _split_row(line: str, delim: Optional[str]) -> List[str]:
    fields = line.split(delim)
    if delim is not None:
        fields = [f.strip() for f in fields]
        # tolerate a trailing delimiter
        if fields and fields[-1] == "":
            fields.pop()
    return fields


def _parse_values(tokens: Sequence[str], where: str) -> np.ndarray:
    out = np.empty(len(tokens), dtype=np.float64)
    for i, tok in enumerate(tokens):
        try:
            v = float(tok)
        except ValueError:
            raise FormatError(f"{where}: non-numeric value {tok!r}")
        if not math.isfinite(v):
            raise FormatError(f"{where}: non-finite value {tok!r}",
                              hint="missing values must be imputed before loading")
        out[i] = v
    return out


def load_ucr(path: str, delimiter: str = "auto", labeled: bool = True) -> Dataset:
    """
    Load a UCR text file: one sample per line, label first, then the values.

    Args:
        path: dataset file
        delimiter: auto | tab | comma | whitespace; auto inspects the first line
        labeled: False for files without a label column

    Returns:
        Dataset named after the file stem; sample_id is the row index
    """
    if delimiter != "auto" and delimiter not in DELIMITERS:
        raise InvalidParamsError(f"unknown delimiter {delimiter!r}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise DatasetIOError(f"cannot read dataset {path}: {e}")

    rows = [(no, ln) for no, ln in enumerate(lines, start=1) if ln.strip()]
    if not rows:
        raise EmptyDatasetError(f"{path} contains no samples")

    delim = _detect_delimiter(rows[0][1]) if delimiter == "auto" else DELIMITERS[delimiter]
    others = [d for d in ("\t", ",") if d != delim]

    samples = []
    for sample_id, (line_no, line) in enumerate(rows):
        where = f"{os.path.basename(path)}:{line_no}"
        if any(d in line for d in others) and (delim is None or delim not in line):
            raise FormatError(f"{where}: inconsistent delimiter")
        fields = _split_row(line, delim)
        label = None
        if labeled:
            label, fields = fields[0].strip(), fields[1:]
            if not label:
                raise FormatError(f"{where}: empty label")
        if len(fields) < 2:
            raise FormatError(f"{where}: a sample needs at least 2 values, got {len(fields)}")
        samples.append(TimeSeriesSample(sample_id, _parse_values(fields, where), label))

    name = os.path.splitext(os.path.basename(path))[0]
    ds = Dataset(name=name, samples=samples)
    logger.info("loaded %s: %d samples, %d classes", name, len(samples), len(ds.class_labels))
    return ds


def write_ucr(ds: Dataset, path: str, delimiter: str = "tab") -> None:
    """Write a dataset in the UCR text format with shortest round-trip floats."""
    sep = DELIMITERS.get(delimiter) or " "
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for s in ds.samples:
                fields = [repr(float(v)) for v in s.values]
                if s.label is not None:
                    fields.insert(0, s.label)
                fh.write(sep.join(fields) + "\n")
    except OSError as e:
        raise DatasetIOError(f"cannot write dataset {path}: {e}")


def znormalize(ds: Dataset) -> Dataset:
    """Per-sample z-normalization; constant series are only centred."""
    out = []
    for s in ds.samples:
        mu = float(np.mean(s.values))
        sd = float(np.std(s.values))
        vals = (s.values - mu) / sd if sd > 0 else s.values - mu
        out.append(TimeSeriesSample(s.sample_id, vals, s.label))
    return Dataset(ds.name, out, ds.class_labels)


def subset(ds: Dataset, sample_ids, suffix: str) -> Dataset:
    """Samples with the given ids, in sample_id order."""
    wanted = set(sample_ids)
    picked = sorted((s for s in ds.samples if s.sample_id in wanted), key=lambda s: s.sample_id)
    return Dataset(f"{ds.name}_{suffix}", picked, ds.class_labels)


def stratified_split(ds: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """
    Per class, max(1, ceil(test_fraction * count)) samples go to test.

    Selection uses a PCG64 generator seeded with spec.seed, walking the classes in
    class_labels order and permuting each class's samples sorted by sample_id.

    Raises:
        SplitInfeasibleError: a class would end with no train sample
    """
    if not ds.labeled:
        raise MissingLabelError(f"{ds.name}: every sample needs a label to be split")

    by_class: Dict[str, List[int]] = {c: [] for c in ds.class_labels}
    for s in ds.samples:
        by_class[s.label].append(s.sample_id)

    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    test_ids = []
    for label in ds.class_labels:
        ids = sorted(by_class[label])
        n_test = max(1, math.ceil(spec.test_fraction * len(ids) - _CEIL_EPS))
        if n_test >= len(ids):
            raise SplitInfeasibleError(
                f"class {label!r} has {len(ids)} sample(s); test_fraction {spec.test_fraction} leaves none for training",
                hint="lower tsize or supply a separate test file",
            )
        order = rng.permutation(len(ids))
        test_ids.extend(ids[k] for k in order[:n_test])

    test_set = set(test_ids)
    train_ids = [s.sample_id for s in ds.samples if s.sample_id not in test_set]
    return subset(ds, train_ids, "train"), subset(ds, test_ids, "test")
