from __future__ import annotations


class DegenchError(Exception):
    """Base class for all failures raised by the package.

    ``exit_code`` is what the command-line front end returns when the error
    reaches it: 2 for usage/config problems, 3 for numerical failures.
    """

    exit_code = 3


class InvalidArgument(DegenchError, ValueError):
    exit_code = 2


class ConfigError(InvalidArgument):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnsupportedDomain(InvalidArgument):
    pass


class NumericalError(DegenchError, ArithmeticError):
    exit_code = 3


class Diverged(NumericalError):
    pass


class NoInterface(NumericalError):
    pass


class NoSolution(NumericalError):
    def __init__(self, loop: str, message: str):
        super().__init__(f"{loop} loop: {message}")
        self.loop = loop


class NotQuasiStationary(NumericalError):
    pass


class UnstableMode(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass
