"""Exception types shared across the package."""


class FixsettleError(Exception):
    """Base class for all package-specific errors."""


class ParameterDomainError(FixsettleError, ValueError):
    """A parameter lies outside its admissible range."""


class OriginError(FixsettleError, ValueError):
    """An operation defined away from the origin was called at the origin."""


class EmptyDomainError(FixsettleError, ValueError):
    """A grid or list argument that must be nonempty was empty."""


class DegenerateDomainError(FixsettleError, ValueError):
    """A grid collapses to a single point, so slopes are undefined."""


class ConfigurationError(FixsettleError, ValueError):
    """A required configuration item is missing or inconsistent."""


class LemmaPreconditionError(FixsettleError, ValueError):
    """An input sequence violates the preconditions of a sequence lemma.

    Carries ``index``, the first offending position.
    """

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class PerturbationBoundError(FixsettleError, RuntimeError):
    """A generated perturbation violated its declared norm bound."""


class SimulationDivergedError(FixsettleError, RuntimeError):
    """A simulated state became non-finite or exceeded the magnitude guard.

    Carries ``last_finite_index``, the index of the last recorded finite
    state, and optionally ``x0``, the initial condition of the offending run.
    """

    def __init__(self, message: str, last_finite_index: int, x0=None):
        super().__init__(message)
        self.last_finite_index = last_finite_index
        self.x0 = x0
