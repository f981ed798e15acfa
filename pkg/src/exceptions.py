"""
Exception hierarchy for the rtkit reproduction number toolkit
"""

from typing import Optional

class RtkitError(Exception):
    """Base class for all toolkit errors"""

class InvalidParameters(RtkitError, ValueError):
    """A parameter or configuration value violates its invariants"""

class NonFiniteState(RtkitError):
    """An integrated compartment became non-finite or materially negative"""

class NonFiniteObjective(RtkitError):
    """The objective returned a non-finite value at a probe"""

class ThresholdNeverReached(RtkitError):
    """The cumulative case series never exceeds the start threshold"""

class InsufficientHistory(RtkitError):
    """A lookup reaches before the start of the available series"""

class NegativeCompartment(RtkitError):
    """Observed counts imply a negative susceptible population"""

class UnknownCountry(RtkitError):
    """The requested country is absent from a feed"""

class MalformedRow(RtkitError):
    """A feed row cannot be parsed"""
    
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

class DateGap(RtkitError):
    """Feed dates are not consecutive days"""

class NoStreams(RtkitError):
    """No mobility transportation streams were found"""

class NoOverlap(RtkitError):
    """Series share no dates"""

class TooFewPairs(RtkitError):
    """Fewer paired observations than a rank correlation needs"""

class ZeroVariance(RtkitError):
    """A correlated variable is constant, so the coefficient is undefined"""

class SeriesTooShort(RtkitError):
    """A series has fewer values than an operation requires"""

class SnapshotIncomplete(RtkitError):
    """The data snapshot is missing or was only partially fetched"""

class FetchError(RtkitError):
    """Downloading a feed file failed"""
