"""Exception hierarchy shared across the toolkit."""


class HyplqrError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(HyplqrError, ValueError):
    """An argument violates a precondition (bad dimension, off-grid location, ...)."""


class DomainError(HyplqrError, ValueError):
    """A physical quantity lies outside its admissible range."""


class ConfigError(InvalidArgumentError):
    """A configuration file is malformed or contains unknown keys."""


class SingularityError(HyplqrError):
    """A model coefficient is evaluated at a pole (e.g. Arrhenius term at theta1 = -1)."""


class ConvergenceError(HyplqrError):
    """An iterative solve stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(HyplqrError):
    """A state became non-finite during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class CFLError(HyplqrError):
    """The explicit time step exceeded the CFL bound mid-run."""

    def __init__(self, message, time=None, bound=None):
        super().__init__(message)
        self.time = time
        self.bound = bound


class NumericalError(HyplqrError):
    """A dense linear-algebra kernel failed to converge."""


class SingularEquationError(HyplqrError):
    """Lyapunov/Sylvester spectra overlap; the equation has no unique solution."""


class SynthesisError(HyplqrError):
    """No stabilizing Riccati solution exists for the given system."""


class OracleError(HyplqrError):
    """A test oracle failed to produce a reference value."""
