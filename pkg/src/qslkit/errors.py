"""Exception hierarchy shared by every qslkit module."""


class QslkitError(Exception):
    """Base class for all errors raised by qslkit."""


class InvalidArgumentError(QslkitError, ValueError):
    pass


class OutOfRangeError(InvalidArgumentError):
    pass


class NotAStateError(InvalidArgumentError):
    """Matrix fails the density-matrix checks (trace, Hermiticity, positivity)."""


class DegenerateSpectrumError(QslkitError, ArithmeticError):
    """The Hamiltonian has a degenerate spectrum where a gap is required."""


class NumericalError(QslkitError, RuntimeError):
    """An integrator detected loss of accuracy and refused to continue."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(QslkitError, ValueError):
    pass
