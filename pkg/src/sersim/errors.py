"""Exception types shared across the package."""


class SersError(Exception):
    """Base class for all sersim errors."""


class ValidationError(SersError):
    """Invalid parameters, tables, device definitions or tolerance specs."""


class GeometryError(ValidationError):
    """Physically impossible geometry, e.g. a winding that does not fit."""


class DeviceFileError(ValidationError):
    """Device-description file could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MaterialError(SersError):
    """A material model cannot provide the requested quantity."""


class SolverError(SersError):
    """Operating-point root finding failed."""


class BracketingError(SolverError):
    """No sign change found for the circuit residual within the search range."""


class ConvergenceError(SolverError):
    """Root finding hit the iteration cap before reaching tolerance."""


class KneeNotFoundError(SersError):
    """A current sweep does not contain a switching transition."""


class ConsistencyError(SersError):
    """An independent cross-check disagreed with the closed form."""
