"""Exception hierarchy shared by all modules."""


class KaczmarzError(Exception):
    """Base class for every error raised by this package."""


class ZeroRow(KaczmarzError, ValueError):
    def __init__(self, row):
        super().__init__(f"row {row} has (numerically) zero norm")
        self.row = row


class SolutionReached(KaczmarzError):
    """The residual vanished, so the residual-weighted law is undefined."""


class RuleNotStochastic(KaczmarzError, TypeError):
    pass


class AtSolution(KaczmarzError, ValueError):
    pass


class ZeroVector(KaczmarzError, ValueError):
    pass


class SingularOrIllConditioned(KaczmarzError, ArithmeticError):
    pass


class FloorViolated(KaczmarzError, ArithmeticError):
    """A J_p estimate fell below its proven lower bound (a bug, not a math event)."""


class BadMatrixFile(KaczmarzError, ValueError):
    def __init__(self, path, line, reason):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class GeneratorError(KaczmarzError, ValueError):
    pass


class SelfCheckFailed(KaczmarzError, ArithmeticError):
    """Two algebraically identical evaluations disagreed beyond rounding."""
