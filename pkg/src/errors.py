"""Error hierarchy shared by the compressor, the classifier and the CLI."""
from typing import Optional

EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3


class AbbaVsmError(Exception):
    """Base error. Carries a machine code, a message, an optional hint and a CLI exit code."""

    code = "error"
    exit_code = EXIT_INPUT_ERROR

    def __init__(self, message: str, *, hint: Optional[str] = None, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.hint = hint
        if code is not None:
            self.code = code


# --- input errors (exit code 2) ---

class DatasetIOError(AbbaVsmError):
    code = "io_error"


class FormatError(AbbaVsmError):
    code = "format_error"


class EmptyDatasetError(AbbaVsmError):
    code = "empty_dataset"


class InvalidInputError(AbbaVsmError):
    code = "invalid_input"


class InvalidParamsError(AbbaVsmError):
    code = "invalid_params"


class MissingLabelError(AbbaVsmError):
    code = "missing_label"


class EmptyInputError(AbbaVsmError):
    code = "empty_input"


class SingleClassCorpusError(AbbaVsmError):
    code = "single_class_corpus"


class EmptySearchSpaceError(AbbaVsmError):
    code = "empty_search_space"


# --- infeasible configuration (exit code 3) ---

class SplitInfeasibleError(AbbaVsmError):
    code = "split_infeasible"
    exit_code = EXIT_INFEASIBLE


class ConfigOutOfRangeError(AbbaVsmError):
    code = "config_out_of_range"
    exit_code = EXIT_INFEASIBLE


# --- per-sample outcome ---

class UnclassifiableSampleError(AbbaVsmError):
    """No test word is in the training vocabulary, so the frequency vector is zero."""

    code = "unclassifiable"

    def __init__(self, message: str, *, sample_id: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.sample_id = sample_id
