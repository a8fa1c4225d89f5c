class DomainError(ValueError):
    """Input outside the domain of an operation (unstable, on a wall, degenerate)."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of budget before meeting its tolerance."""

    def __init__(self, message: str, residual: float | None = None, iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
