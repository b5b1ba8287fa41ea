"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An input parameter is outside its documented domain."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""
