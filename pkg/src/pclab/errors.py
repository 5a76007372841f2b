"""Exception hierarchy shared by every pclab module."""


class PCLabError(Exception):
    """Base class for all library errors."""


class ConfigurationError(PCLabError, ValueError):
    """Malformed input: bad shapes, invalid parameters, failed load-time checks."""


class InvalidParameter(ConfigurationError):
    pass


class DistanceToEmpty(PCLabError):
    pass


class PreconditionFailed(PCLabError):
    pass


class UnboundedRegion(PCLabError):
    pass


class UnknownLabel(PCLabError, KeyError):
    pass


class NotAContraction(PCLabError):
    pass


class OutsideDomain(PCLabError):
    pass


class SingularPoint(PCLabError):
    pass


class Unsupported(PCLabError):
    pass


class ResourceExceeded(PCLabError):
    pass


class SeparationViolated(PCLabError):
    pass


class CertificateInconsistent(PCLabError):
    """An extracted orbit contradicts its own certificate; always a bug."""
