"""Exception hierarchy shared by all modules."""


class TdbError(Exception):
    """Base class for every error raised by tdb_spde."""


class DiscretizationError(TdbError, ValueError):
    pass


class DimensionError(TdbError, ValueError):
    pass


class BudgetError(TdbError, ValueError):
    pass


class ParameterError(TdbError, ValueError):
    pass


class NonPSDError(TdbError, ValueError):
    pass


class RangeError(TdbError, ValueError):
    pass


class AssemblyError(TdbError):
    pass


class CoverageError(AssemblyError):
    pass


class BlowupError(TdbError, FloatingPointError):
    """Non-finite values appeared during integration.

    ``time`` is the time stamp of the failing evaluation (or the last valid
    time for integrators).
    """

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class IllConditionedError(TdbError, ArithmeticError):
    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class DegenerateInitError(TdbError, ValueError):
    pass


class UnsupportedDiagnosticError(TdbError):
    pass


class WrongMetricError(TdbError, ValueError):
    pass


class ConfigError(TdbError, ValueError):
    pass


class CaseRunError(TdbError):
    """A benchmark run failed; ``case`` and ``time`` locate the failure."""

    def __init__(self, message: str, case: str | None = None, time: float | None = None):
        super().__init__(message)
        self.case = case
        self.time = time
