"""
distfobs exceptions
===================
One exception per failure mode of the design pipeline. Value-shaped
problems also derive from ValueError so callers that only know numpy
conventions still catch them.
"""


class DistFObsError(Exception):
    """Base class for all distfobs errors."""


class SquareRequired(DistFObsError, ValueError):
    pass


class DimensionMismatch(DistFObsError, ValueError):
    pass


class NonFiniteEntry(DistFObsError, ValueError):
    pass


class InvalidNode(DistFObsError, ValueError):
    pass


class NotStronglyConnected(DistFObsError):
    pass


class EmptySelection(DistFObsError, ValueError):
    pass


class NoFeasibleLeaderSet(DistFObsError):
    pass


class ResidualTooLarge(DistFObsError, ArithmeticError):
    """An identity that holds in exact arithmetic failed beyond residual_tol."""


class SynthesisFailed(DistFObsError):
    pass


class DecompositionFailed(DistFObsError):
    pass


class ModeUnsupported(DistFObsError):
    pass


class ScenarioError(DistFObsError, ValueError):
    """Scenario or model failed validation."""

    def __init__(self, issues):
        if isinstance(issues, str):
            issues = [issues]
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class IoError(DistFObsError, OSError):
    pass
