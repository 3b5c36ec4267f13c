"""Set-theoretical Yang-Baxter maps from refactorization of matrix polynomials
and matrix theta functions."""

from twistmap.errors import (
    DegenerateInstance,
    DegenerateSpectrum,
    DegenerateZeros,
    DimensionMismatch,
    NoConvergence,
    NonUniqueSolution,
    OutsideDomain,
    PartitionMismatch,
    QuotientResidual,
    SingularLambda,
    SpectraOverlap,
    TwistError,
    ZeroCountMismatch,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInstance",
    "DegenerateSpectrum",
    "DegenerateZeros",
    "DimensionMismatch",
    "NoConvergence",
    "NonUniqueSolution",
    "OutsideDomain",
    "PartitionMismatch",
    "QuotientResidual",
    "SingularLambda",
    "SpectraOverlap",
    "TwistError",
    "ZeroCountMismatch",
]
