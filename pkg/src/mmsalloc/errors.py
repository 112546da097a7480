"""Exception hierarchy shared by the solvers, the oracles and the CLI."""


class MmsError(Exception):
    """Base class for every error raised by this package."""


class InputError(MmsError, ValueError):
    """Malformed input: bad item ids, negative values, wrong shapes."""


class CapacityError(MmsError):
    """The requested exhaustive computation exceeds the supported size."""


class UnsupportedError(MmsError):
    """The operation is not defined for this valuation kind or vertex type."""


class DegenerateInstanceError(MmsError):
    """An agent has a maximin share of zero where a positive one is required."""


class PreconditionError(MmsError):
    """A documented precondition of an operation does not hold."""


class InfeasibleError(MmsError):
    """No matching or partition with the requested property exists."""


class StructuralError(MmsError):
    """An allocation is not a partition of the item set."""

    def __init__(self, message: str, missing=(), duplicated=(), unknown=()):
        super().__init__(message)
        self.missing = tuple(missing)
        self.duplicated = tuple(duplicated)
        self.unknown = tuple(unknown)


class GuaranteeError(MmsError):
    """A solver could not reach its approximation guarantee."""

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


class InvariantViolation(MmsError, AssertionError):
    """A runtime check of an algorithmic invariant failed (verification mode)."""


class EstimateTooHigh(MmsError):
    """A local-search solver found no improving move for ``agent``.

    Raised when the maximin-share estimate of that agent is too large; the
    estimate descent wrapper catches it and lowers the estimate.
    """

    def __init__(self, agent: int):
        super().__init__(f"no improving move for agent {agent}")
        self.agent = agent
