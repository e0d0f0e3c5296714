"""Exception types shared across the package."""


class WidthlabError(Exception):
    """Base class for all errors raised by widthlab."""


class DomainError(WidthlabError):
    """An input lies outside the documented domain of an operation."""


class QuadratureError(WidthlabError):
    """A quadrature refinement step moved by more than its tolerance."""


class TraceError(WidthlabError):
    """A characteristic left the domain before reaching the outflow face."""


class CertificateError(WidthlabError):
    """A packing certificate was refused.

    Carries the offending curve pair so callers can report which
    separation check failed.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ConfigError(WidthlabError):
    """An experiment configuration is missing or malformed."""
