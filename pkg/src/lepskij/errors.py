"""Exception hierarchy shared by all modules."""


class LepskijError(Exception):
    """Base class for every error raised by this package."""


class ConstraintViolation(LepskijError, ValueError):
    """A model or configuration parameter violates one of its constraints.

    The ``name`` attribute carries the identifier of the first failed
    constraint so callers (and the CLI) can report it.
    """

    def __init__(self, name, message=None):
        self.name = name
        super().__init__(message or f"constraint violated: {name}")


class DegenerateDimension(LepskijError, ValueError):
    pass


class LevelOutOfRange(LepskijError, IndexError):
    pass


class GridTooCoarse(LepskijError, ValueError):
    pass


class PreconditionViolated(LepskijError, ValueError):
    pass


class ZeroNoiseBehavior(LepskijError, ZeroDivisionError):
    pass


class NoBalancePoint(LepskijError):
    pass


class NoFastPoint(LepskijError):
    pass


class SeriesDiverged(LepskijError, ArithmeticError):
    """A geometric series inside the oracle-constant bound does not converge."""
