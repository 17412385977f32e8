"""Exception hierarchy shared by all fracred modules."""


class FracredError(Exception):
    """Base class for domain errors raised by fracred.

    The command-line driver maps every subclass to exit status 1.
    """


class OrderError(FracredError, ValueError):
    pass


class SpecialFunctionError(FracredError, ArithmeticError):
    pass


class GammaPoleError(SpecialFunctionError):
    pass


class ConvergenceError(SpecialFunctionError):
    pass


class PowerSumError(FracredError, ValueError):
    pass


class ReductionError(FracredError, ValueError):
    pass


class SolverError(FracredError, ArithmeticError):
    pass


class StabilityError(FracredError, ValueError):
    pass


class ExpressionError(FracredError, ValueError):
    """Syntax or binding error in a right-hand-side expression.

    ``offset`` is the byte offset into the UTF-8 source where the problem
    was detected, or ``None`` when no location applies.
    """

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class EvaluationError(ExpressionError, ArithmeticError):
    pass


class ProblemFileError(FracredError, ValueError):
    pass
