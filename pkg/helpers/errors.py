from typing import Optional


class TwinsError(ValueError):
    """Base class for every error raised by the library."""


class PreconditionError(TwinsError):
    """Inputs violate a documented precondition of the operation."""


class DecodeError(PreconditionError):

    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.position = position


class BoundsError(PreconditionError):
    pass


class UndefinedDensityError(PreconditionError):
    pass


class EpsilonTooSmallError(PreconditionError):

    def __init__(self, message: str, minimum_epsilon=None):
        super().__init__(message)
        self.minimum_epsilon = minimum_epsilon


class EpsilonTooLargeError(PreconditionError):
    pass


class InvalidPartitionError(PreconditionError):
    pass


class WitnessMismatchError(PreconditionError):
    pass


class WordTooShortError(PreconditionError):
    pass


class UnsupportedAlphabetError(PreconditionError):
    pass


class WrongRegimeError(PreconditionError):
    pass


class NotRegularError(PreconditionError):
    pass


class InfeasibleError(PreconditionError):
    pass


class ParameterError(PreconditionError):
    pass


class SizeError(PreconditionError):
    pass
