"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError (and subclasses) -> 1,
OS-level I/O errors -> 2, ContractViolationError -> 3.
"""


class PowersimError(Exception):
    """Base class for all package errors."""


class ValidationError(PowersimError):
    """Bad input: malformed config values, out-of-range parameters, etc."""


class TraceParseError(ValidationError):
    """Malformed trace CSV row. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ContractViolationError(PowersimError):
    """An internal invariant was broken; indicates a bug, not bad input."""
