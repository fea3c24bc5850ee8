"""Exception hierarchy shared by every module of the package."""


class KGError(Exception):
    """Base class for all errors raised by medkg."""


class EmptyGraphError(KGError):
    pass


class ParseError(KGError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class UnknownEntityError(KGError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownRelationError(KGError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidSpecError(KGError, ValueError):
    pass


class InvalidArgumentError(KGError, ValueError):
    pass


class DivergenceError(KGError, ArithmeticError):
    def __init__(self, iteration, loss):
        self.iteration = iteration
        self.loss = loss
        super().__init__(f"training diverged at iteration {iteration} (loss={loss})")


class CheckpointError(KGError):
    pass


class EmptyTestSetError(KGError):
    pass


class InvalidUserError(KGError):
    pass


class EmptyCohortError(KGError):
    pass


class DegenerateScoreError(KGError, ZeroDivisionError):
    pass


class DegenerateVectorError(KGError, ValueError):
    pass


class IoError(KGError, OSError):
    pass
