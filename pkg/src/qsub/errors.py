"""Exception hierarchy shared by every qsub module."""


class QsubError(Exception):
    """Base class for all errors raised by qsub."""


class LayoutTooLarge(QsubError, ValueError):
    pass


class LayoutMismatch(QsubError, ValueError):
    pass


class NoFlagQubit(QsubError, ValueError):
    pass


class DegenerateBranch(QsubError, RuntimeError):
    """A measurement sampled a branch with (numerically) zero mass."""


class ZeroResidual(QsubError, ArithmeticError):
    """Rejection of a vector that is parallel to the one it is rejected from."""


class PredicateSyntaxError(QsubError, SyntaxError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class PredicateTypeError(QsubError, TypeError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.position = position


class NoSolutions(QsubError, ValueError):
    pass


class DegenerateSet(QsubError, ValueError):
    pass


class InvalidTrialCount(QsubError, ValueError):
    pass


class ReportWriteError(QsubError, OSError):
    pass
