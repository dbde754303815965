"""Exception types shared across the package."""


class DegenerateConfigurationError(ValueError):
    """Two points that enter a force denominator coincide (or a point is zero)."""


class HypothesisError(ValueError):
    """A precondition of the combination construction is violated."""


class RootFindingError(RuntimeError):
    """Polynomial roots could not be polished to the requested residual."""


class DegreeDropError(ValueError):
    """The zero polynomial of a Gauss component lost degree (non-simple case)."""


class MultipleZeroError(ValueError):
    """Two zeros of a Gauss component coincide within tolerance."""


class PoleEvaluationError(ValueError):
    """A meromorphic function was evaluated at one of its poles."""


class ContourError(ValueError):
    """The residue contour radius collapsed (poles too close together)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature along a mesh edge did not reach tolerance."""


class GridError(ValueError):
    """The level grid cannot accommodate the removed disks."""


class AssemblyError(RuntimeError):
    """Neck/level stitching mismatch exceeded the configured ceiling.

    The offending diagnostics are attached as ``self.diagnostics``.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class UnbalancedConfigurationError(ValueError):
    """An operation that needs a balanced configuration received an unbalanced one."""
