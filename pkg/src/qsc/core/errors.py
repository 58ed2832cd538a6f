"""Exception hierarchy shared by all layers."""


class QscError(Exception):
    """Base class for all package errors."""


class ValidationError(QscError):
    """Ill-formed circuit description or IR (CLI exit code 2)."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, code: str = "E_INVALID"):
        self.line = line
        self.column = column
        self.code = code
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"{code}: {message}{loc}")


class SimulationError(QscError):
    """Runtime failure while executing a valid circuit (CLI exit code 3)."""
