"""Exception hierarchy shared by every stage of the pipeline.

Input problems (bad files, bad specs, empty corpora) derive from
:class:`InputError` so the CLI can map them to exit code 2; everything else
is a runtime failure.
"""

from __future__ import annotations


class BetrayalError(Exception):
    """Base class for all package errors."""


class InputError(BetrayalError):
    """The caller supplied unusable input."""


class RecordSyntaxError(InputError):
    """A corpus line is not well-formed JSON."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class SchemaError(InputError):
    """A field is missing or has the wrong type."""

    def __init__(self, field: str, message: str = "missing or ill-typed", line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}field {field!r}: {message}")
        self.field = field
        self.line = line


class ConsistencyError(InputError):
    """A record parses but violates a game-log invariant."""


class EmptyCorpus(InputError):
    pass


class UnknownTerritory(BetrayalError):
    def __init__(self, territory: str):
        super().__init__(f"unknown territory {territory!r}")
        self.territory = territory


class InsufficientControls(BetrayalError):
    pass


class ImbalanceError(BetrayalError):
    """Raised under strict balance when matched cohorts differ (p <= 0.05)."""


class InsufficientData(BetrayalError):
    pass


class DegenerateSample(BetrayalError):
    pass


class SingleClass(BetrayalError):
    pass


class NonFinite(BetrayalError):
    pass


class TooFewGroups(BetrayalError):
    pass


class LengthMismatch(BetrayalError):
    pass


class InvalidSpec(InputError):
    pass
