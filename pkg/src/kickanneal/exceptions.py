"""Exception hierarchy shared by the simulator, theory and CLI layers."""


class KickAnnealError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(KickAnnealError, ValueError):
    """Invalid register, model or experiment configuration."""

    exit_code = 2


class DomainError(KickAnnealError, ValueError):
    """A theory formula was evaluated outside its domain of validity."""

    exit_code = 3


class NormalizationError(KickAnnealError, ValueError):
    """A state handed to an observable is not normalized."""

    exit_code = 4


class NormDriftError(KickAnnealError, RuntimeError):
    """Norm of the evolving state drifted past the abort threshold."""

    exit_code = 5


class QuadratureError(KickAnnealError, RuntimeError):
    exit_code = 6
