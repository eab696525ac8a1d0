"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A tensor operation would exceed the configured dimension cap."""


class NonHermitianError(ValueError):
    """A matrix expected to be Hermitian deviates beyond tolerance."""


class MatrixDomainError(ValueError):
    """A spectral function was evaluated outside its domain."""


class PlanError(ValueError):
    """Trotter plan parameters are unusable (e.g. some |delta| >= 1)."""


class ExtinctionError(RuntimeError):
    """A post-selection or normalization probability vanished numerically."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""
