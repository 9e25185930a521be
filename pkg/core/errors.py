"""
Exception hierarchy for the PMC pipeline.

Input problems (bad manifest, schema, scorecards, config) and computation
problems map to distinct CLI exit codes.
"""

from typing import Iterable, Optional

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INPUT = 2
EXIT_COMPUTATION = 3


class PipelineError(Exception):
    exit_code = EXIT_UNEXPECTED


class InputValidationError(PipelineError):
    exit_code = EXIT_INPUT


class ComputationError(PipelineError):
    exit_code = EXIT_COMPUTATION


class CorpusError(InputValidationError):
    def __init__(self, message: str, entry_id: Optional[str] = None):
        self.entry_id = entry_id
        if entry_id is not None:
            message = f"entry {entry_id!r}: {message}"
        super().__init__(message)


class NormalizationError(InputValidationError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at byte offset {offset}")


class SchemaError(InputValidationError):
    def __init__(self, message: str, ids: Iterable[str] = ()):
        self.ids = list(ids)
        if self.ids:
            message = f"{message}: {', '.join(self.ids)}"
        super().__init__(message)


class ScorecardError(InputValidationError):
    def __init__(self, message: str, doc_id: Optional[str] = None, ids: Iterable[str] = ()):
        self.doc_id = doc_id
        self.ids = list(ids)
        if self.ids:
            message = f"{message}: {', '.join(self.ids)}"
        if doc_id is not None:
            message = f"document {doc_id!r}: {message}"
        super().__init__(message)


class ConfigError(InputValidationError):
    pass


class KeywordError(ComputationError):
    pass


class ClusteringError(ComputationError):
    pass


class PmcError(ComputationError):
    pass


class ReportError(ComputationError):
    pass
