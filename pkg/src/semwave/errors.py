"""Exception hierarchy shared by all semwave modules."""


class SemwaveError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""

    exit_code = 2


class InvalidParameterError(SemwaveError, ValueError):
    pass


class DegenerateStateError(SemwaveError, ValueError):
    """A state (or vector) has zero norm where a direction is required."""


class DegenerateVectorError(DegenerateStateError):
    pass


class DegenerateEmbeddingError(DegenerateStateError):
    pass


class IncompatibleGridsError(SemwaveError, ValueError):
    pass


class WrongMethodError(SemwaveError, ValueError):
    pass


class UnsupportedCombinationError(SemwaveError, ValueError):
    pass


class UnknownQuantityError(SemwaveError, KeyError):
    def __str__(self) -> str:  # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class ConvergenceError(SemwaveError, RuntimeError):
    exit_code = 1

    def __init__(self, message: str, last_energy: float):
        super().__init__(message)
        self.last_energy = last_energy
