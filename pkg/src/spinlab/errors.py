"""Exception hierarchy shared by all modules."""


class SpinlabError(Exception):
    """Base class for spinlab failures."""


class InputError(SpinlabError, ValueError):
    """Bad user input: invalid system, frame, sequence or parameter."""


class SpinSystemError(InputError):
    pass


class NumericalError(SpinlabError, ArithmeticError):
    """A numerical procedure failed to converge or was ill-conditioned."""


class ConvergenceError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
