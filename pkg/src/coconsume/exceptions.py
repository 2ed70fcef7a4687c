"""Exception hierarchy.

Everything raised on purpose derives from :class:`AnalysisError` so the CLI
can map it to exit code 1. Usage and I/O problems use :class:`UsageError`
(exit code 2).
"""


class AnalysisError(Exception):
    """Base class for errors raised by the analysis modules."""


class UsageError(Exception):
    """Bad invocation or unreadable input; mapped to exit code 2."""


class IngestError(AnalysisError):
    """A listing stream could not be parsed (or strict mode hit a reject)."""


class EmptyGraphError(AnalysisError):
    """No records/nodes survived filtering."""


class GraphError(AnalysisError, ValueError):
    """Invalid graph input: unknown node, self-loop, bad weight, disconnected."""


class DisconnectedGraphError(GraphError):
    pass


class ConvergenceError(AnalysisError):
    """Power iteration did not converge.

    Attributes
    ----------
    residual : float
        Infinity-norm change at the last iteration.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class RankDeficientError(AnalysisError, ValueError):
    """Design matrix is (numerically) rank deficient.

    Attributes
    ----------
    columns : list of str
        Names of the columns involved in the collinearity.
    """

    def __init__(self, message, columns):
        super().__init__(message)
        self.columns = list(columns)
