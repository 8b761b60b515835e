"""Result files: predictions CSV, report JSON and the TSV tables used for external plotting."""
import csv
import json
import logging
import os
from typing import Dict, List, Mapping, Sequence

from src.classification.vsm import Prediction
from src.errors import DatasetIOError, FormatError

logger = logging.getLogger(__name__)

CR_TABLE_COLUMNS = ("rt", "mean_cr", "mean_segment_fraction")
GRID_TABLE_COLUMNS = ("rank", "index", "status", "accuracy", "mean_cr", "mean_segment_fraction",
                      "unclassifiable", "alphabet_size", "rt", "ctype", "ct", "csize", "wsize", "wstep", "tsize",
                      "train_seconds", "test_seconds")


def ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as e:
        raise DatasetIOError(f"cannot create directory {parent}: {e}")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_predictions(predictions: Sequence[Prediction], class_labels: Sequence[str], path: str) -> None:
    """sample_id,predicted,score_<class>...,status,actual; no timings so reruns are byte-identical."""
    ensure_parent(path)
    header = ["sample_id", "predicted"] + [f"score_{c}" for c in class_labels] + ["status", "actual"]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for p in predictions:
                scores = [_cell(float(p.scores.get(c, 0.0))) for c in class_labels]
                writer.writerow([p.sample_id, _cell(p.predicted)] + scores + [p.status, _cell(p.actual)])
    except OSError as e:
        raise DatasetIOError(f"cannot write predictions {path}: {e}")
    logger.info("wrote %d predictions to %s", len(predictions), path)


def read_predictions(path: str) -> List[Dict[str, str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        raise DatasetIOError(f"cannot read predictions {path}: {e}")
    if rows and not {"sample_id", "predicted", "status"} <= set(rows[0]):
        raise FormatError(f"{path}: not a predictions file")
    return rows


def accuracy_from_rows(rows: Sequence[Mapping[str, str]]) -> float:
    """Accuracy recomputed from a predictions file; rows without an actual label are skipped."""
    judged = [r for r in rows if r.get("actual")]
    if not judged:
        return 0.0
    return sum(r["predicted"] == r["actual"] for r in judged) / len(judged)


def write_json(doc: Mapping, path: str) -> None:
    ensure_parent(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, ensure_ascii=False, allow_nan=False)
            fh.write("\n")
    except OSError as e:
        raise DatasetIOError(f"cannot write report {path}: {e}")
    logger.info("report written to %s", path)


def _write_tsv(rows: Sequence[Mapping], columns: Sequence[str], path: str) -> None:
    ensure_parent(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(row.get(c)) for c in columns])
    except OSError as e:
        raise DatasetIOError(f"cannot write table {path}: {e}")


def write_cr_table(rows: Sequence[Mapping[str, float]], path: str) -> None:
    """CR-vs-RT table: rt, mean_cr, mean_segment_fraction."""
    _write_tsv(rows, CR_TABLE_COLUMNS, path)
    logger.info("CR table (%d tolerances) written to %s", len(rows), path)


def write_grid_table(rows: Sequence, path: str) -> None:
    """One line per evaluated config in ranked order."""
    flat = []
    for rank, row in enumerate(rows, start=1):
        d = row.to_dict()
        cfg = d.pop("config")
        flat.append({"rank": rank, **cfg, **d})
    _write_tsv(flat, GRID_TABLE_COLUMNS, path)
    logger.info("grid table (%d rows) written to %s", len(rows), path)
