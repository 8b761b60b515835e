"""Model file: one JSON document holding the codebook, vocabulary and class weights."""
import json
import logging
from typing import Any, Dict

import jsonschema
import numpy as np

from src.classification.vsm import VsmModel
from src.errors import DatasetIOError, FormatError, InvalidParamsError
from src.symbolic.quantizer import Codebook

logger = logging.getLogger(__name__)

FORMAT_NAME = "abba-vsm-model"
FORMAT_VERSION = 1

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}}

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "format_version", "codebook", "vocabulary", "class_labels", "weights", "config"],
    "properties": {
        "format": {"const": FORMAT_NAME},
        "format_version": {"const": FORMAT_VERSION},
        "codebook": {
            "type": "object",
            "required": ["sigma_len", "sigma_inc", "centers", "alphabet", "method", "params"],
            "properties": {
                "sigma_len": {"type": "number", "exclusiveMinimum": 0},
                "sigma_inc": {"type": "number", "exclusiveMinimum": 0},
                "centers": {"type": "array", "minItems": 1,
                            "items": {**_NUMBER_LIST, "minItems": 2, "maxItems": 2}},
                "alphabet": {"type": "array", "items": {"type": "integer"}},
                "method": {"enum": ["sorting_based", "k_means"]},
                "params": {"type": "object"},
            },
        },
        "vocabulary": {"type": "array", "items": {"type": "array", "minItems": 1, "items": {"type": "integer"}}},
        "class_labels": {"type": "array", "minItems": 2, "items": {"type": "string"}},
        "weights": {"type": "array", "items": _NUMBER_LIST},
        "config": {
            "type": "object",
            "required": ["wsize", "wstep"],
            "properties": {
                "wsize": {"type": "integer", "minimum": 1},
                "wstep": {"type": "integer", "minimum": 1},
                "rt": {"type": ["number", "null"]},
            },
        },
        "training": {"type": "object"},
    },
}

_validator = jsonschema.Draft202012Validator(MODEL_SCHEMA)


def model_to_dict(model: VsmModel) -> Dict[str, Any]:
    cb = model.codebook
    return {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "codebook": {
            "sigma_len": cb.sigma_len,
            "sigma_inc": cb.sigma_inc,
            "centers": [list(c) for c in cb.centers],
            "alphabet": list(cb.alphabet),
            "method": cb.method,
            "params": dict(cb.method_params),
        },
        "vocabulary": [list(w) for w in model.vocabulary],
        "class_labels": list(model.class_labels),
        "weights": [[float(v) for v in row] for row in model.weights],
        "config": {"wsize": model.wsize, "wstep": model.wstep, "rt": model.rt,
                   "clustering": {"method": cb.method, **cb.method_params}},
        "training": {"class_sizes": dict(model.class_sizes), **model.metadata},
    }


def model_from_dict(doc: Dict[str, Any], source: str = "<model>") -> VsmModel:
    errors = sorted(_validator.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.path) or "document"
        raise FormatError(f"{source}: invalid model file at {where}: {err.message}")

    n_words, n_classes = len(doc["vocabulary"]), len(doc["class_labels"])
    weights = np.asarray(doc["weights"], dtype=np.float64)
    if weights.size == 0:
        weights = weights.reshape(n_words, n_classes)
    if weights.shape != (n_words, n_classes):
        raise FormatError(f"{source}: weight matrix is {weights.shape}, expected ({n_words}, {n_classes})")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise FormatError(f"{source}: weights must be finite and non-negative")

    c = doc["codebook"]
    try:
        codebook = Codebook(
            sigma_len=float(c["sigma_len"]),
            sigma_inc=float(c["sigma_inc"]),
            centers=tuple((float(x), float(y)) for x, y in c["centers"]),
            alphabet=tuple(int(a) for a in c["alphabet"]),
            method=c["method"],
            method_params=dict(c["params"]),
        )
    except InvalidParamsError as e:
        raise FormatError(f"{source}: invalid codebook: {e.message}")

    training = dict(doc.get("training", {}))
    class_sizes = {str(k): int(v) for k, v in training.pop("class_sizes", {}).items()}
    cfg = doc["config"]
    return VsmModel(
        vocabulary=tuple(tuple(int(s) for s in w) for w in doc["vocabulary"]),
        class_labels=tuple(doc["class_labels"]),
        weights=weights,
        wsize=int(cfg["wsize"]),
        wstep=int(cfg["wstep"]),
        codebook=codebook,
        rt=cfg.get("rt"),
        class_sizes=class_sizes,
        metadata=training,
    )


def save_model(model: VsmModel, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(model_to_dict(model), fh, ensure_ascii=False, allow_nan=False, indent=1)
            fh.write("\n")
    except OSError as e:
        raise DatasetIOError(f"cannot write model {path}: {e}")
    logger.info("model saved to %s", path)


def load_model(path: str) -> VsmModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise DatasetIOError(f"cannot read model {path}: {e}")
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"{path}: corrupted model file ({e})")
    return model_from_dict(doc, source=path)
