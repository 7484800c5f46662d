"""Exceptions and warnings raised by the screw-line library."""


class ScrewLineError(ValueError):
    """Base class for every error raised by the library."""


class PoleError(ScrewLineError):
    pass


class DomainError(ScrewLineError):
    pass


class CapacityError(ScrewLineError):
    pass


class TableTooSmallError(ScrewLineError):
    pass


class JumpPointError(ScrewLineError):
    pass


class PoleProximityError(ScrewLineError):
    pass


class ExclusionZoneError(ScrewLineError):
    pass


class ConfigError(ScrewLineError):
    pass


class QuadratureError(ScrewLineError):
    """Adaptive quadrature ran out of subdivisions."""

    def __init__(self, message, worst_interval=None, error=None):
        super().__init__(message)
        self.worst_interval = worst_interval
        self.error = error


class ZeroTableParseError(ScrewLineError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ZeroTableValidationError(ScrewLineError):
    def __init__(self, message, invariant):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class LossOfPrecisionWarning(RuntimeWarning):
    pass


class SuspectedMultipleZeroWarning(RuntimeWarning):
    pass


class UnstableExtrapolationWarning(RuntimeWarning):
    pass


class TruncatedTableWarning(UserWarning):
    pass
