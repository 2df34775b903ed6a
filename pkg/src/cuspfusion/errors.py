"""Exception hierarchy shared by all cuspfusion modules."""


class CuspFusionError(Exception):
    """Base class for every error raised by this package."""


class ConvergenceFailure(CuspFusionError):
    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"person {index}: {message}")
        self.index = index


class CurvatureFailure(CuspFusionError):
    pass


class DomainError(CuspFusionError, ValueError):
    pass


class SchemaError(CuspFusionError):
    pass


class ParseError(CuspFusionError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SpecMismatch(CuspFusionError, ValueError):
    pass


class DegenerateLabels(CuspFusionError, ValueError):
    pass


class InsufficientData(CuspFusionError, ValueError):
    pass


class DegenerateParameters(CuspFusionError, ValueError):
    pass


class ConfigError(CuspFusionError):
    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class RenderError(CuspFusionError):
    pass


class SingularScale(UserWarning):
    """A feature had zero variance on the training set; its scale was set to 1."""
