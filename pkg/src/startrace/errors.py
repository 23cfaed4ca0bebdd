"""Exception and warning types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter or configuration detected before any computation."""


class EvaluationError(RuntimeError):
    """A field evaluation produced an unusable value.

    Carries ``node_index`` when the failure happened at a quadrature node.
    """

    def __init__(self, message, node_index=None):
        super().__init__(message)
        self.node_index = node_index


class UnsupportedKindError(TypeError):
    """Operation not defined for this profile / test-function kind."""


class SolverError(RuntimeError):
    """Linear solve failed to converge; carries the iteration count."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class PrecisionWarning(UserWarning):
    """Result returned, but the truncation error estimate is not negligible."""
