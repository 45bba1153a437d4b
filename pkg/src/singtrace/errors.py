"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside an operation's mathematical domain."""


class SchemaError(ValueError):
    """A model file or descriptor violates the documented schema."""


class UnsupportedKindError(DomainError):
    """The requested operation is not defined for this model kind."""


class DiagnosticError(RuntimeError):
    """A numeric procedure failed to converge; carries its probe dump."""

    def __init__(self, message, probes=None):
        super().__init__(message)
        self.probes = list(probes) if probes is not None else []
