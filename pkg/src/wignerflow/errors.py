"""Exception types shared across the package."""


class WignerFlowError(Exception):
    """Base class for package errors."""


class DomainError(WignerFlowError, ValueError):
    """Invalid argument value (non-finite input, negative order, ...)."""


class UnboundStateError(WignerFlowError, ValueError):
    """Requested quantum number lies above the bound spectrum."""


class OrderLimitError(WignerFlowError, ValueError):
    """Requested derivative order exceeds the configured maximum."""


class AccuracyError(WignerFlowError, RuntimeError):
    """A numerical accuracy guarantee cannot be met (e.g. tails not contained)."""


class ConfigError(WignerFlowError, ValueError):
    """Invalid run configuration."""
