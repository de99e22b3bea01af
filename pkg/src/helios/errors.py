"""Exception types shared across the package.

Every failure mode callers are expected to branch on gets its own class.
Plain programming errors (wrong argument types etc.) still raise the
usual built-ins.
"""


class HeliosError(Exception):
    """Base class for all package-specific errors."""


class InputError(HeliosError):
    """Malformed input data: wrong sample length, non-finite values."""


class ParameterError(HeliosError):
    """Scalar parameter outside its admissible range."""


class GeometryError(HeliosError):
    """A boundary curve violates a structural invariant."""


class SolveError(HeliosError):
    """A linear solve did not meet its residual contract.

    Attributes
    ----------
    residual : float
        Relative l2 residual of the offending solve.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = float(residual)


class OracleInconclusiveError(HeliosError):
    """A reference solver could not certify its own accuracy.

    Raised instead of returning a value whose error is unknown.

    Attributes
    ----------
    misfit : float
        Sup-norm boundary misfit of the rejected fit.
    """

    def __init__(self, message, misfit):
        super().__init__(message)
        self.misfit = float(misfit)


class BlowUpError(HeliosError):
    """Time stepping produced a non-finite or wildly out-of-range sample.

    Attributes
    ----------
    node : int
        Index of the first offending grid node.
    time : float
        Simulation time at which the violation was detected.
    """

    def __init__(self, message, node, time):
        super().__init__(message)
        self.node = int(node)
        self.time = float(time)


class ConventionError(HeliosError):
    """A sign-convention calibration identity failed.

    This signals an internal inconsistency in the layer-potential
    conventions, never bad user input.
    """


class ConfigError(HeliosError):
    """Run configuration file is missing, malformed, or has unknown keys."""
