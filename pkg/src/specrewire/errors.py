"""Exception types shared across the package."""


class SpecRewireError(Exception):
    """Base class for every error raised by this package."""


class GraphError(SpecRewireError, ValueError):
    pass


class EdgeAlreadyPresent(GraphError):
    pass


class EdgeAbsent(GraphError):
    pass


class WouldIsolateNode(GraphError):
    pass


class SelfLoopRejected(GraphError):
    pass


class DuplicateEdgeRejected(GraphError):
    pass


class ParseError(GraphError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConnectivityRetriesExhausted(SpecRewireError, RuntimeError):
    pass


class ZeroDegreeNode(SpecRewireError, ValueError):
    pass


class GraphTooLargeForDense(SpecRewireError, ValueError):
    pass


class GraphTooLargeForEnumeration(SpecRewireError, ValueError):
    pass


class DisconnectedGraph(SpecRewireError, ValueError):
    pass


class NotConverged(SpecRewireError, RuntimeError):
    """Raised when the iterative solver misses its tolerance.

    The best estimate found is attached as ``estimate`` so callers can
    decide whether to keep it.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NotConvergedWarning(RuntimeWarning):
    pass


class PlanError(SpecRewireError, ValueError):
    pass


class NoCandidates(SpecRewireError, ValueError):
    pass


class AllCandidatesFiltered(SpecRewireError, ValueError):
    pass


class DegenerateSplit(SpecRewireError, ValueError):
    pass


class ZeroVectorRow(SpecRewireError, ValueError):
    pass
