"""Exception types shared across the package."""


class ThermocatError(Exception):
    """Base class for library errors."""


class PreconditionViolated(ThermocatError):
    pass


class DimensionMismatch(ThermocatError, ValueError):
    pass


class SolverFailure(ThermocatError):
    """The LP backend did not return a usable solution."""


class BudgetExceeded(ThermocatError):
    """An enumeration visited more nodes than its configured cap."""


class NotMember(ThermocatError):
    """The queried state is outside the reachable set."""
