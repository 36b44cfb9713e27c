"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the documented domain of an operation."""


class ResourceError(RuntimeError):
    """A request exceeds a configured memory or size budget."""


class CapabilityError(RuntimeError):
    """The exact method cannot handle this input size; a fallback is named."""


class NumericalError(RuntimeError):
    """A quadrature or iteration failed to reach the requested tolerance."""
