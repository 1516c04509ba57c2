"""Exception hierarchy shared by the solvers and the command-line front end."""


class KKMFixError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGridError(KKMFixError, ValueError):
    pass


class DimensionError(KKMFixError, ValueError):
    pass


class InvalidSetError(KKMFixError, ValueError):
    pass


class ProjectionNonconvergenceError(KKMFixError, RuntimeError):
    pass


class SamplingError(KKMFixError, RuntimeError):
    pass


class PreconditionError(KKMFixError, ValueError):
    pass


class SizeError(KKMFixError, ValueError):
    pass


class EvaluationError(KKMFixError, ArithmeticError):
    pass


class NotApplicableError(KKMFixError, ValueError):
    """Raised when a formula is requested outside the regime where it holds."""


class ConditionsViolatedError(KKMFixError, RuntimeError):
    """Neither the sup-norm nor the L2 existence condition holds."""


class OracleUnavailableError(KKMFixError, RuntimeError):
    """The dense Nystrom system is singular or too ill-conditioned to trust."""


class ExpressionSyntaxError(KKMFixError, ValueError):
    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifierError(ExpressionSyntaxError):
    pass
