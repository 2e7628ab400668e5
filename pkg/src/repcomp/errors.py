"""Exception types shared across the package."""


class RepcompError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(RepcompError, ValueError):
    """A parameter combination is not supported (e.g. custom function without
    an evaluator, bit-slicing on a non power-of-two alphabet)."""


class CapacityError(RepcompError, ValueError):
    """An enumeration would exceed its configured budget."""


class InfeasibleSubproblemError(RepcompError):
    """A feasibility subproblem has no solution within tolerance.

    Carries the index and witness tuple pair of the worst-violated
    separation constraint when one is known.
    """

    def __init__(self, message, constraint_index=None, witness=None):
        super().__init__(message)
        self.constraint_index = constraint_index
        self.witness = witness


class DesignInfeasibleError(RepcompError):
    """The joint design problem is infeasible at the requested noise level.

    Raised when a subproblem fails on the very first alternation; a larger
    slot count L (or a smaller design noise variance) usually resolves it.
    """

    def __init__(self, message, cause=None):
        super().__init__(message)
        self.cause = cause


class SchemaError(RepcompError, ValueError):
    """A file does not match the expected schema (CSV columns, artifact keys)."""
