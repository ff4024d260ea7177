"""Exception hierarchy shared by all modules."""


class SymGammaError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimension(SymGammaError, ValueError):
    pass


class InvalidPartition(SymGammaError, ValueError):
    pass


class EvaluationDomain(SymGammaError, ValueError):
    pass


class NumericalFailure(SymGammaError, ArithmeticError):
    pass


class GridTooCoarse(SymGammaError, ValueError):
    pass


class SymmetryViolation(SymGammaError, ValueError):
    pass


class NotAToeplitzOperator(SymGammaError):
    """Raised when an operator admits no symbol within the residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class WindowTooSmall(SymGammaError, ValueError):
    pass


class SlowConvergence(SymGammaError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoFundamentalOperator(SymGammaError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ExtensionIllDefined(SymGammaError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotApplicable(SymGammaError):
    pass


class InvalidSpec(SymGammaError, ValueError):
    pass


class InvalidTuple(SymGammaError, ValueError):
    pass
