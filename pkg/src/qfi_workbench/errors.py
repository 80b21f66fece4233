"""Exception hierarchy shared by every module of the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by qfi_workbench."""


class DimensionError(WorkbenchError, ValueError):
    pass


class HermiticityError(WorkbenchError, ValueError):
    pass


class NumericalError(WorkbenchError, ArithmeticError):
    """A numerical routine failed or produced an untrustworthy result."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class IntegrationError(NumericalError):
    pass


class AmbiguousGapError(NumericalError):
    pass


class ModelError(WorkbenchError, ValueError):
    pass


class ModelSyntaxError(ModelError):
    """Syntax error in a coefficient expression or model file.

    ``line`` and ``column`` are 1-based; ``position`` is the 0-based offset
    inside the offending expression string (when there is one).
    """

    def __init__(self, message, line=None, column=None, position=None):
        self.line = line
        self.column = column
        self.position = position
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if not where and position is not None:
            where.append(f"position {position}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class InapplicableBoundError(WorkbenchError, ValueError):
    pass


class UnsupportedDirectionError(WorkbenchError, ValueError):
    pass


class IdentifiabilityError(WorkbenchError, ValueError):
    pass


class BracketError(WorkbenchError, ValueError):
    pass


class ConfigError(WorkbenchError, ValueError):
    pass
