"""Exception hierarchy shared by all crglab modules.

Every failure mode that callers are expected to handle has its own class;
generic ValueError/TypeError are reserved for plain misuse of the API.
"""

from __future__ import annotations


class CrgLabError(Exception):
    """Base class for all crglab-specific errors."""


class OverflowUnrepresentable(CrgLabError, ArithmeticError):
    """Even the log-modulus of a value exceeds the binary64 range."""


class ZeroHit(CrgLabError, ArithmeticError):
    """An evaluation point coincides with a zero of the function."""


class NearZero(CrgLabError, ArithmeticError):
    """Logarithmic derivative requested too close to a zero."""


class ContourTooClose(CrgLabError, ArithmeticError):
    """Argument-principle contour passes too close to a zero."""


class NonIntegerResidue(CrgLabError, ArithmeticError):
    """Contour integral failed to converge to an integer winding count."""


class ZeroInDisk(CrgLabError):
    """A disk assumed zero-free contains (or touches) a zero."""


class NonConvergent(CrgLabError, ArithmeticError):
    """Quadrature did not stabilise under node doubling."""


class SectorViolation(CrgLabError, ValueError):
    """Sample point violates the sector distance rule."""


class BandViolation(CrgLabError, ValueError):
    """Sample angle lies outside the admissible band around the zero ray."""


class HypothesisFailure(CrgLabError):
    """A quantitative hypothesis check failed before the main computation."""


class BranchViolation(CrgLabError, ValueError):
    """Argument of z outside the (0, 2*pi) branch domain."""


class NonpositiveInterior(CrgLabError):
    """Indicator is nonpositive strictly inside an arc assumed positive."""


class BelowThreshold(CrgLabError, ValueError):
    """Starting radius at or below the minorant threshold x0."""


class IncompleteZeroList(CrgLabError):
    """The model cannot enumerate all zeros in the requested disk."""


class CertificateFailure(CrgLabError):
    """A constructive covering certificate failed its own audit."""


class ParseError(CrgLabError, ValueError):
    """Function-spec mini-language rejected the input."""

    def __init__(self, message: str, line: int, column: int,
                 expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += " (expected: " + ", ".join(expected) + ")"
        super().__init__(detail)
