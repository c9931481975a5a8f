"""Exception hierarchy shared across the package."""


class LeaderSelError(Exception):
    """Base class for all domain errors raised by this package."""


# -- graph construction and I/O ------------------------------------------

class GraphError(LeaderSelError):
    """Invalid graph structure."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NonPositiveWeightError(GraphError):
    pass


class NodeOutOfRangeError(GraphError):
    pass


class InvalidProbabilityError(GraphError):
    pass


class ParseError(LeaderSelError):
    """Graph file is not valid JSON."""


class SchemaError(LeaderSelError):
    """Graph file parses but violates the documented schema."""


# -- linear algebra kernel -----------------------------------------------

class NotSymmetricError(LeaderSelError):
    pass


class NotPositiveDefiniteError(LeaderSelError):
    pass


class SingularUpdateError(LeaderSelError):
    """Rank-one update denominator is at or below tolerance."""


class UnstableMatrixError(LeaderSelError):
    """Lyapunov solve failed or violated its residual bound."""


class DimensionCapError(LeaderSelError):
    pass


class EigenFailureError(LeaderSelError):
    pass


# -- stability / coherence / selection ------------------------------------

class UnsupportedOrderError(LeaderSelError):
    pass


class EmptyLeaderSetError(LeaderSelError):
    pass


class UnstableSystemError(LeaderSelError):
    """System fails the stability conditions (or is within the marginal band)."""


class UnstableGainsError(LeaderSelError):
    """Gains do not stabilise every nonempty leader set of the graph."""


class PreconditionViolatedError(LeaderSelError):
    pass


class CombinatorialCapError(LeaderSelError):
    pass


# -- simulation ------------------------------------------------------------

class StepTooLargeError(LeaderSelError):
    pass
