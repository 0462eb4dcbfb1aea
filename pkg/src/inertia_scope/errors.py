"""Exception hierarchy.

Two families matter to the CLI: input problems (exit code 2) and numeric
failures (exit code 3).
"""


class InertiaScopeError(Exception):
    """Base class for all package errors."""


class InputError(InertiaScopeError):
    """Bad case file, config or argument."""


class NumericError(InertiaScopeError):
    """A computation could not produce a meaningful number."""


class ParseError(InputError):
    pass


class ValidationError(InputError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ImbalanceError(InputError):
    pass


class DomainError(InputError):
    pass


class UnknownBusError(DomainError):
    pass


class NoGeneratorError(DomainError):
    pass


class ConfigError(InputError):
    pass


class NoBoundaryError(InputError):
    pass


class IoError(InertiaScopeError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericsError(NumericError):
    pass


class WindowError(NumericError):
    pass


class DegenerateEventError(NumericError):
    pass


class NearZeroRocofError(NumericError):
    pass


class EmptyWindowError(NumericError):
    pass


class PipelineError(InertiaScopeError):
    """Wraps a module error with the pipeline stage it came from."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
