"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularLocusError(DomainError):
    """A phase-space point sits on (or too close to) a singular locus of a map."""


class UnsupportedError(NotImplementedError):
    """The requested configuration is deliberately not implemented."""


class QuadratureError(ArithmeticError):
    """A quadrature failed to converge; carries the diagnostics that were reached."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({extra})"


class NonIntegrableError(QuadratureError):
    """A ray integral does not converge because the integrand fails to decay."""
