"""Exceptions raised by the computational layers."""

from typing import Any, Optional


class MgcError(Exception):
    """Base class; ``partial`` carries whatever was computed before failing."""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class SingularMatrix(MgcError):
    pass


class IllFormedHom(MgcError):
    pass


class NotAnAutomorphism(MgcError):
    pass


class NonUnitDenominator(MgcError):
    pass


class Unsupported(MgcError):
    pass


class DepthExceeded(MgcError):
    pass


class InfiniteRank(MgcError):
    pass


class UnsupportedAtTwo(MgcError):
    pass


class ShapeMismatch(MgcError):
    pass


class LiftFailure(MgcError):
    pass


class SizeExceeded(MgcError):
    pass


class NotAMorphism(MgcError):
    pass


class UnsupportedSeries(MgcError):
    pass


class SpecFormatError(MgcError):
    pass
