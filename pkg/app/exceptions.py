class SolverError(Exception):
    """Base error for the solver; carries the process exit code."""

    exit_code: int = 1

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ConfigError(SolverError):
    """Raised when a configuration, plan or input contract is invalid."""

    exit_code = 2


class MeshMismatchError(ConfigError):
    """Raised when operators and functions live on different meshes."""


class NumericalError(SolverError):
    """Raised when a numerical invariant is violated."""

    exit_code = 3


class OutputError(SolverError):
    """Raised when results cannot be written."""

    exit_code = 4


VALIDATION_FAILED_EXIT_CODE = 5
