"""Exception taxonomy for slantlab.

Every failure mode raised by the geometric core is a subclass of
SlantLabError so callers (CLI, scenario runner) can distinguish library
errors from genuine bugs.
"""


class SlantLabError(Exception):
    """Base class for all slantlab errors."""


class DimensionMismatchError(SlantLabError):
    """Operands live in charts or frames of different dimension."""


class NotSpacelikeError(SlantLabError):
    """A subspace required to be spacelike has a non-positive-definite Gram matrix."""


class DegenerateFrameError(SlantLabError):
    """A supplied basis is rank deficient."""


class ContractError(SlantLabError):
    """A numerical precondition (self-adjointness, eigenvector residual) is violated."""


class EvaluationError(SlantLabError):
    """A map could not be evaluated; carries the offending point when known."""

    def __init__(self, message, point=None, coordinate=None):
        super().__init__(message)
        self.point = point
        self.coordinate = coordinate


class DegenerateMetricError(SlantLabError):
    """Metric is singular at the requested point."""


class DegenerateImmersionError(SlantLabError):
    """Immersion Jacobian drops rank at the requested parameter."""


class XiNotTangentError(SlantLabError):
    """The structure vector field is not tangent to the submanifold."""


class XiDirectionError(SlantLabError):
    """A slant angle was requested for a vector proportional to the structure field."""


class NullVectorError(SlantLabError):
    """A slant angle was requested for a vector with null (lightlike) component."""


class UsageError(SlantLabError):
    """Bad arguments at an operation or CLI boundary (empty samples, unknown names)."""


class ParseError(SlantLabError):
    """Expression or scenario syntax error with 1-based source position."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class ScenarioError(SlantLabError):
    """Scenario file is syntactically valid but semantically inconsistent."""
