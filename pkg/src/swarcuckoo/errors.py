"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised when filter parameters violate a documented constraint."""


class PhaseError(RuntimeError):
    """Raised in debug mode when queries overlap mutations.

    The filter's contract keeps read and write phases separate; this error
    only fires when a ``CuckooFilter`` was built with ``debug_phase=True``.
    """


class FastaError(ValueError):
    """Raised on structurally malformed FASTA input.

    Carries the 1-based line number where parsing failed.
    """

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
