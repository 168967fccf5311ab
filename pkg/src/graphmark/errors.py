"""Exception types shared across the package."""


class GraphMarkError(Exception):
    """Base class for all domain errors raised by graphmark."""


class ValidationError(GraphMarkError):
    """A value violates a structural precondition (ids, ranges, sizes)."""


class ParameterError(GraphMarkError):
    """Model or threshold parameters are outside their valid domain."""


class EdgeListParseError(GraphMarkError):
    """An edge-list stream could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ThresholdInfeasibleError(GraphMarkError):
    """Analytic degree-class thresholds collapse at the requested scale."""


class KeygenInfeasibleError(GraphMarkError):
    """No key of the requested shape exists, or sampling gave up."""


class LabelingFailure(GraphMarkError):
    """Strict labeling aborted; ``reason`` distinguishes the failing step."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class MatchingFailure(GraphMarkError):
    """Strict approximate isomorphism could not produce an injective map."""
