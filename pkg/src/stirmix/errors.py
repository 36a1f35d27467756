"""Exception hierarchy shared by all stirmix modules."""


class StirmixError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(StirmixError, ValueError):
    """Invalid parameters; ``field`` names the offending parameter."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericalError(StirmixError, ArithmeticError):
    """Base class for failures during a computation."""


class PointAtVortex(NumericalError):
    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} (iterate {index})")
        self.index = index


class DegenerateArc(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class SingularityApproach(NumericalError):
    pass


class SingularPoint(NumericalError):
    pass


class NoRealRoot(NumericalError):
    pass


class OutOfRange(NumericalError, ValueError):
    pass


class ZeroTwist(NumericalError):
    pass


class FlatSpectrum(NumericalError):
    pass


class WindowTooShort(NumericalError, ValueError):
    pass


class DegenerateMean(NumericalError):
    pass


class EmptyInput(StirmixError, ValueError):
    pass
