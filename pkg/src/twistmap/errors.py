"""Typed failures raised when an input is outside the generic locus."""


class TwistError(ArithmeticError):
    """Base class for every refusal issued by this package."""


class DegenerateSpectrum(TwistError):
    pass


class NoConvergence(TwistError):
    pass


class SpectraOverlap(TwistError):
    pass


class SingularLambda(TwistError):
    pass


class OutsideDomain(TwistError):
    """A rational map was evaluated on its pole locus.

    ``letter`` carries the offending braid letter when raised from a word
    evaluation.
    """

    def __init__(self, message="", letter=None):
        super().__init__(message)
        self.letter = letter


class PartitionMismatch(TwistError):
    pass


class DegenerateInstance(TwistError):
    pass


class DimensionMismatch(TwistError):
    pass


class ZeroCountMismatch(TwistError):
    pass


class DegenerateZeros(TwistError):
    pass


class NonUniqueSolution(TwistError):
    pass


class QuotientResidual(TwistError):
    pass
