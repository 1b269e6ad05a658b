"""Exception hierarchy shared by every module."""


class DepmodError(Exception):
    """Base class for all package errors."""


class InvalidParams(DepmodError, ValueError):
    pass


class DomainError(DepmodError, ValueError):
    """Argument lies outside a function's mathematical domain or a law's support."""


class NotPositiveDefinite(DepmodError, ValueError):
    pass


class BracketError(DepmodError, ValueError):
    """Target probability is not enclosed by the search bracket."""


class QuantileBracketError(BracketError):
    pass


class UnsupportedFamily(DepmodError, ValueError):
    pass


class MonotonicityViolation(DepmodError, ValueError):
    pass


class SingularLift(DepmodError, ValueError):
    pass


class InfiniteVariance(DepmodError, ValueError):
    pass


class DegenerateOutput(DepmodError, ValueError):
    pass


class MixedMethods(DepmodError, ValueError):
    pass


class AcceptanceTooLow(DepmodError, RuntimeError):
    pass


class TooFewSamples(DepmodError, ValueError):
    pass


class SpecParseError(DepmodError, ValueError):
    pass


class UnsupportedAnalytic(DepmodError, ValueError):
    pass
