"""Exception hierarchy shared by every sspkit module."""


class SspError(Exception):
    """Base class for all sspkit errors."""


class InvalidInstance(SspError):
    pass


class NoProperPolicy(SspError):
    """Some state cannot reach the target in the (restricted) support graph."""

    def __init__(self, message, dead_states=()):
        super().__init__(message)
        self.dead_states = frozenset(dead_states)


class ImproperPolicy(SspError):
    pass


class SingularSystem(SspError):
    pass


class NumericalFailure(SspError):
    pass


class DecompositionFailure(SspError):
    pass


class AssumptionViolated(SspError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoConvergence(SspError):
    pass


class ExtractionFailure(SspError):
    pass


class PropernessLost(SspError):
    """Policy iteration produced an improper policy.

    The offending policy is kept on ``policy`` so callers can inspect it.
    """

    def __init__(self, message, policy=None, iteration=None):
        super().__init__(message)
        self.policy = policy
        self.iteration = iteration


class NegativeCosts(SspError):
    pass


class StallDetected(SspError):
    pass


class Unbounded(SspError):
    pass


class GenerationFailure(SspError):
    pass
