"""Configuration management for the ABBA-VSM pipeline."""
import math
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import load_dotenv

try:
    import tomli
except ImportError:  # Python 3.11+ ships the same parser
    import tomllib as tomli

from src.errors import ConfigOutOfRangeError, FormatError, InvalidParamsError, DatasetIOError

load_dotenv()

# Pipeline defaults
DEFAULT_RT = float(os.getenv("ABBA_RT", "0.1"))
DEFAULT_CTYPE = os.getenv("ABBA_CTYPE", "sorting_based")
DEFAULT_CT = float(os.getenv("ABBA_CT", "0.1"))
DEFAULT_WSIZE = int(os.getenv("ABBA_WSIZE", "3"))
DEFAULT_WSTEP = int(os.getenv("ABBA_WSTEP", "1"))
DEFAULT_CSIZE = int(os.getenv("ABBA_CSIZE", "5"))
DEFAULT_TSIZE = float(os.getenv("ABBA_TSIZE", "0.2"))
DEFAULT_SEED = int(os.getenv("ABBA_SEED", "0"))

# Outputs
OUTPUT_DIR = os.getenv("ABBA_OUTPUT_DIR", "./results")
ACCURACY_THRESHOLD = float(os.getenv("ABBA_ACCURACY_THRESHOLD", "0.8"))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = os.getenv("LOG_FORMAT", "text").lower()  # text | json

# Optional: directory holding UCR files for the dataset-backed checks
UCR_ROOT = os.getenv("UCR_ROOT")

CTYPES = ("sorting_based", "k_means")

# Hyperparameter search space of the evaluation
DEFAULT_SEARCH_SPACE: Dict[str, Tuple] = {
    "rt": (0.001, 0.005, 0.01, 0.05, 0.1, 0.3, 0.5, 0.7),
    "ctype": ("k_means", "sorting_based"),
    "ct": (0.001, 0.005, 0.01, 0.05, 0.1, 0.3, 0.5, 0.7),
    "wsize": (2, 3, 4, 5, 6, 7, 8, 9, 10),
    "wstep": (1, 2, 3, 4),
    "csize": (2, 3, 4, 5, 6, 7, 8),
    "tsize": (0.05, 0.1, 0.2, 0.3, 0.4),
}

# Admissible bounds derived from the search space
_BOUNDS = {key: (min(vals), max(vals)) for key, vals in DEFAULT_SEARCH_SPACE.items() if key != "ctype"}

_PIPELINE_KEYS = ("rt", "ctype", "ct", "wsize", "wstep", "csize", "tsize", "seed", "output_dir", "znorm", "fallback")


@dataclass(frozen=True)
class PipelineConfig:
    rt: float = DEFAULT_RT
    ctype: str = DEFAULT_CTYPE
    ct: float = DEFAULT_CT
    wsize: int = DEFAULT_WSIZE
    wstep: int = DEFAULT_WSTEP
    csize: int = DEFAULT_CSIZE
    tsize: float = DEFAULT_TSIZE
    seed: int = DEFAULT_SEED
    output_dir: str = OUTPUT_DIR
    znorm: bool = False
    fallback: bool = False

    def clustering_params(self) -> Dict[str, Any]:
        """Parameters of the active clustering method only."""
        if self.ctype == "sorting_based":
            return {"ct": self.ct}
        return {"csize": self.csize, "seed": self.seed}

    def hyperparameters(self) -> Dict[str, Any]:
        """The search-space part of the config, inactive clustering knob dropped."""
        hp = {"rt": self.rt, "ctype": self.ctype, "wsize": self.wsize, "wstep": self.wstep, "tsize": self.tsize}
        hp.update({k: v for k, v in self.clustering_params().items() if k != "seed"})
        return hp

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def validate(self, allow_out_of_range: bool = False) -> "PipelineConfig":
        """
        Check basic validity, then the search-space bounds.

        Raises:
            InvalidParamsError: a value no pipeline step can use
            ConfigOutOfRangeError: a usable value outside the search space
        """
        if not (isinstance(self.rt, (int, float)) and math.isfinite(self.rt) and self.rt > 0):
            raise InvalidParamsError(f"rt must be a finite value > 0, got {self.rt!r}")
        if self.ctype not in CTYPES:
            raise InvalidParamsError(f"unknown ctype {self.ctype!r}", hint=f"choose one of {', '.join(CTYPES)}")
        if not (math.isfinite(self.ct) and self.ct > 0):
            raise InvalidParamsError(f"ct must be > 0, got {self.ct!r}")
        for name in ("wsize", "wstep", "csize"):
            if int(getattr(self, name)) < 1:
                raise InvalidParamsError(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if not 0 < self.tsize < 1:
            raise InvalidParamsError(f"tsize must lie in (0, 1), got {self.tsize!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParamsError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

        if not allow_out_of_range:
            active = {"rt", "wsize", "wstep", "tsize", "ct" if self.ctype == "sorting_based" else "csize"}
            for name in sorted(active):
                lo, hi = _BOUNDS[name]
                value = getattr(self, name)
                if not lo <= value <= hi:
                    raise ConfigOutOfRangeError(
                        f"{name}={value} is outside the admissible range [{lo}, {hi}]",
                        hint="pass --allow-out-of-range to use it anyway",
                    )
        return self


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a TOML config file. Returns the raw document."""
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except OSError as e:
        raise DatasetIOError(f"cannot read config file {path}: {e}")
    except tomli.TOMLDecodeError as e:
        raise FormatError(f"invalid TOML in {path}: {e}")


def _coerce(key: str, value: Any) -> Any:
    if key in ("rt", "ct", "tsize"):
        return float(value)
    if key in ("wsize", "wstep", "csize", "seed"):
        return int(value)
    if key in ("znorm", "fallback"):
        return bool(value)
    return str(value)


def resolve_config(file_values: Optional[Mapping[str, Any]] = None,
                   overrides: Optional[Mapping[str, Any]] = None) -> PipelineConfig:
    """
    Merge environment defaults, a config file's [pipeline] table and flag overrides.

    Args:
        file_values: parsed TOML document (may be None)
        overrides: flag values; None entries are ignored

    Returns:
        Unvalidated PipelineConfig
    """
    merged: Dict[str, Any] = {}
    table = (file_values or {}).get("pipeline", {})
    for source in (table, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _PIPELINE_KEYS:
                raise InvalidParamsError(f"unknown pipeline key {key!r}")
            try:
                merged[key] = _coerce(key, value)
            except (TypeError, ValueError):
                raise InvalidParamsError(f"invalid value for {key}: {value!r}")
    return replace(PipelineConfig(), **merged)


def search_space_from(file_values: Optional[Mapping[str, Any]] = None,
                      overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Tuple]:
    """Search space: defaults, then the file's [search] table, then flag lists."""
    space = dict(DEFAULT_SEARCH_SPACE)
    table = (file_values or {}).get("search", {})
    for source in (table, overrides or {}):
        for key, values in source.items():
            if values is None:
                continue
            if key not in DEFAULT_SEARCH_SPACE:
                raise InvalidParamsError(f"unknown search key {key!r}")
            space[key] = tuple(_coerce(key, v) for v in values)
    return space

