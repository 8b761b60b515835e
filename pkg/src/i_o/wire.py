"""Segment stream (.abbaseg): the JSON-lines link between compressor and classifier.

Line 1 is the header object, every further line one sample record:

    {"format": "abbaseg", "format_version": 1, "dataset_name": "Coffee", "rt": 0.1, "sample_count": 56}
    {"sample_id": 0, "label": "0", "y0": -0.51, "original_length": 286, "segments": [[3, 0.12], ...]}
"""
import json
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import jsonschema

from src.compression.reducer import Segment, SegmentSequence
from src.errors import DatasetIOError, FormatError, InvalidInputError

logger = logging.getLogger(__name__)

FORMAT_NAME = "abbaseg"
FORMAT_VERSION = 1
SUFFIX = ".abbaseg"

# idealized binary payload: a 4-byte integer length plus a 4-byte float increment
BYTES_PER_SEGMENT = 8
BYTES_PER_RAW_VALUE = 4

HEADER_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "format_version", "dataset_name", "rt", "sample_count"],
    "properties": {
        "format": {"const": FORMAT_NAME},
        "format_version": {"type": "integer"},
        "dataset_name": {"type": "string"},
        "rt": {"type": "number", "exclusiveMinimum": 0},
        "sample_count": {"type": "integer", "minimum": 1},
    },
}

RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["sample_id", "label", "y0", "original_length", "segments"],
    "additionalProperties": False,
    "properties": {
        "sample_id": {"type": "integer", "minimum": 0},
        "label": {"type": ["string", "null"]},
        "y0": {"type": "number"},
        "original_length": {"type": "integer", "minimum": 2},
        "segments": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "prefixItems": [{"type": "integer", "minimum": 1}, {"type": "number"}],
                "minItems": 2,
                "maxItems": 2,
            },
        },
    },
}

_header_validator = jsonschema.Draft202012Validator(HEADER_SCHEMA)
_record_validator = jsonschema.Draft202012Validator(RECORD_SCHEMA)


@dataclass(frozen=True)
class WireHeader:
    dataset_name: str
    rt: float
    sample_count: int = 0
    format_version: int = FORMAT_VERSION


@dataclass(frozen=True)
class WireStats:
    bytes_written: int
    raw_equivalent_bytes: int
    segment_payload_bytes: int
    sample_count: int
    segment_count: int

    @property
    def reduction_percent(self) -> float:
        """Payload saving against sending every raw float."""
        return 100.0 * (1.0 - self.segment_payload_bytes / self.raw_equivalent_bytes)

    def to_dict(self) -> dict:
        return {
            "bytes_written": self.bytes_written,
            "raw_equivalent_bytes": self.raw_equivalent_bytes,
            "segment_payload_bytes": self.segment_payload_bytes,
            "reduction_percent": self.reduction_percent,
            "sample_count": self.sample_count,
            "segment_count": self.segment_count,
        }


def _record(seq: SegmentSequence) -> dict:
    return {
        "sample_id": int(seq.sample_id),
        "label": seq.label,
        "y0": float(seq.y0),
        "original_length": int(seq.original_length),
        "segments": [[int(s.len), float(s.inc)] for s in seq.segments],
    }


def encode_segments(seqs: Sequence[SegmentSequence], header: WireHeader) -> Tuple[bytes, WireStats]:
    """Serialize to the JSON-lines byte stream and account for its size."""
    if not seqs:
        raise FormatError("a segment stream must carry at least one sample")
    head = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "dataset_name": header.dataset_name,
        "rt": float(header.rt),
        "sample_count": len(seqs),
    }
    lines = [json.dumps(head, ensure_ascii=False, allow_nan=False)]
    for seq in seqs:
        try:
            seq.check()
        except InvalidInputError as e:
            raise FormatError(f"refusing to write an invalid sequence: {e.message}")
        lines.append(json.dumps(_record(seq), ensure_ascii=False, allow_nan=False))
    payload = ("\n".join(lines) + "\n").encode("utf-8")

    n_segments = sum(len(s.segments) for s in seqs)
    stats = WireStats(
        bytes_written=len(payload),
        raw_equivalent_bytes=sum(BYTES_PER_RAW_VALUE * s.original_length for s in seqs),
        segment_payload_bytes=BYTES_PER_SEGMENT * n_segments,
        sample_count=len(seqs),
        segment_count=n_segments,
    )
    return payload, stats


def write_segments(seqs: Sequence[SegmentSequence], meta: WireHeader, path: str) -> WireStats:
    payload, stats = encode_segments(seqs, meta)
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as e:
        raise DatasetIOError(f"cannot write segment stream {path}: {e}")
    logger.info("wrote %d samples / %d segments to %s (%d bytes)",
                stats.sample_count, stats.segment_count, path, stats.bytes_written)
    return stats


def _parse_record(obj: dict, where: str) -> SegmentSequence:
    errors = sorted(_record_validator.iter_errors(obj), key=lambda e: list(e.path))
    if errors:
        raise FormatError(f"{where}: {errors[0].message}")
    try:
        seq = SegmentSequence(
            sample_id=obj["sample_id"],
            label=obj["label"],
            y0=float(obj["y0"]),
            segments=tuple(Segment(int(ln), float(inc)) for ln, inc in obj["segments"]),
            original_length=obj["original_length"],
        ).check()
    except InvalidInputError as e:
        raise FormatError(f"{where}: {e.message}")
    return seq


def decode_segments(lines: Iterable[str], source: str = "<stream>") -> Tuple[List[SegmentSequence], WireHeader]:
    """Inverse of encode_segments over already split text lines."""
    it = iter(lines)
    try:
        head = json.loads(next(it))
    except StopIteration:
        raise FormatError(f"{source}: empty segment stream")
    except json.JSONDecodeError as e:
        raise FormatError(f"{source}: unreadable header: {e}")
    if not isinstance(head, dict):
        raise FormatError(f"{source}: header must be a JSON object")
    if head.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{source}: unsupported format_version {head.get('format_version')!r}",
                          hint=f"this reader understands version {FORMAT_VERSION}")
    errors = list(_header_validator.iter_errors(head))
    if errors:
        raise FormatError(f"{source}: bad header: {errors[0].message}")

    seqs: List[SegmentSequence] = []
    for line_no, line in enumerate(it, start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"{source}:{line_no}: truncated or corrupt record ({e.msg})")
        seqs.append(_parse_record(obj, f"{source}:{line_no}"))

    if len(seqs) != head["sample_count"]:
        raise FormatError(f"{source}: header announces {head['sample_count']} samples, found {len(seqs)}",
                          hint="the stream was probably truncated")
    header = WireHeader(head["dataset_name"], float(head["rt"]), head["sample_count"], head["format_version"])
    return seqs, header


def read_segments(path: str) -> Tuple[List[SegmentSequence], WireHeader]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DatasetIOError(f"cannot read segment stream {path}: {e}")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not a UTF-8 text stream")
    return decode_segments(text.splitlines(), source=path)


def check_rt(header: WireHeader, rt: Optional[float]) -> bool:
    """Warn (never fail) when the stream was reduced with another tolerance."""
    if rt is None or header.rt == rt:
        return True
    logger.warning("segment stream %s was reduced with rt=%s but rt=%s was requested; using the stream as is",
                   header.dataset_name, header.rt, rt)
    return False
