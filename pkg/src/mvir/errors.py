"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant (bad point,
    inconsistent shapes, malformed file, illegal parameter)."""


class CutLocusError(RuntimeError):
    """Raised when a logarithm map is requested between (numerically)
    antipodal points, where the geodesic is not unique."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SolverError(RuntimeError):
    """Raised when the iterative solver cannot make progress.

    Carries a ``diagnostics`` dict (gradient norm, trial step, energies)
    so failures can be reported without re-running.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
