"""Exception hierarchy shared by the solver, the problem registry and the CLI."""


class FracPCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FracPCError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConfigurationError(FracPCError, ValueError):
    """Inconsistent problem / grid / solver settings."""


class UsageError(FracPCError, ValueError):
    """A routine was called with arguments its stencil cannot serve."""


class DivergenceError(FracPCError, ArithmeticError):
    """The numerical state left the admissible range.

    ``step`` is the grid index of the first offending state and
    ``trajectory`` holds the partial solution computed before it (or None).
    """

    def __init__(self, message, step, trajectory=None):
        super().__init__(message)
        self.step = step
        self.trajectory = trajectory


class SingularityError(FracPCError, ZeroDivisionError):
    """A right-hand side was evaluated where it is undefined."""
