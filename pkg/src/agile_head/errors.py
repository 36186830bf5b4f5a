"""Exception types raised across the package."""


class AgileHeadError(Exception):
    """Base class for all package errors."""


class DomainError(AgileHeadError):
    """An argument is outside the operation's valid domain."""


class NonUnitAxis(AgileHeadError):
    """Rotation axis norm deviates from 1 beyond tolerance."""


class GimbalLock(AgileHeadError):
    """Euler extraction is singular (|pitch| at 90 degrees)."""


class SingularPose(AgileHeadError):
    """Inverse kinematics denominator vanished."""


class NoConvergence(AgileHeadError):
    """Iterative forward kinematics failed to contract."""


class NonMonotonicTime(AgileHeadError):
    """Timestamps must be strictly increasing."""


class DegenerateGeometry(AgileHeadError):
    """Landmark geometry leaves an angle undefined."""


class TooFewPoints(AgileHeadError):
    """Polygon needs at least 3 vertices."""


class BadCalibration(AgileHeadError):
    """Calibration range is empty or inverted."""


class DegenerateFrame(AgileHeadError):
    """All landmarks coincide; normalization undefined."""


class InsufficientData(AgileHeadError):
    """Not enough samples to fit a model."""


class MalformedFrame(AgileHeadError):
    """Wire frame failed to decode."""


class TopicInvalid(AgileHeadError):
    """Topic name is empty, too long, or uses a bad character."""


class Disconnected(AgileHeadError):
    """Bus client is not connected."""


class BindError(AgileHeadError):
    """Broker could not bind its listen address."""


class ParseError(AgileHeadError):
    """Trace or dataset file failed to parse."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"{message} (line {line})")
        self.line = line


class ConfigError(AgileHeadError):
    """Pipeline configuration is invalid."""
