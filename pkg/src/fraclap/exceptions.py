"""Exception types raised by the solvers and the assembly."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConvergenceError(RuntimeError):
    """An iterative solve exhausted its budget.

    ``report`` carries the last iterate and the residual history.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PositivityCollapse(ConvergenceError):
    """Newton iterates were driven toward zero at some node."""


class DivergenceError(ConvergenceError):
    """The semilinear fixed point stopped contracting."""


class BracketError(RuntimeError):
    """A scalar root could not be enclosed (corrupted anchor)."""


class GridMismatchError(ValueError):
    """Two reports refer to different grids."""
