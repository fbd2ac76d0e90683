"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or unsupported parameter/reservoir combination."""


class PhaseBoundaryError(ConfigurationError):
    """Coupling sits on (or numerically too close to) the level-crossing
    kappa = 2*sqrt(eps_a*eps_b), where the lower transition energy vanishes."""


class RegimeError(ValueError):
    """Closed-form criterion called outside its validity regime."""


class NotXStateError(ValueError):
    """Density matrix has entries outside the X pattern above tolerance."""


class DegenerateSteadyStateError(RuntimeError):
    """Null space of the evolution matrix is not numerically one-dimensional."""


class InternalConsistencyError(RuntimeError):
    """Two independent computation routes disagreed; never masked."""
