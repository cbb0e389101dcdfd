"""Exception hierarchy shared by all modules."""


class CDFlagsError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(CDFlagsError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(CDFlagsError, ValueError):
    """A sample point lies outside the guaranteed-accuracy disk."""


class TruncationError(CDFlagsError, ValueError):
    """The truncated series is too short for the requested derivative order."""


class DegenerateMetricError(CDFlagsError, ArithmeticError):
    """A Hermitian metric vanishes (to tolerance) at a sample point."""


class GeometricDegeneracyError(CDFlagsError, ArithmeticError):
    """A quantity that must be strictly positive (e.g. a radicand) is not."""


class AccuracyError(CDFlagsError, ArithmeticError):
    """A truncation residual exceeds the requested tolerance.

    Usually cured by a larger truncation size ``N`` or a smaller sample disk.
    """


class CompletenessError(CDFlagsError):
    """The requested decision is not backed by a complete set of invariants."""


class ResourceError(CDFlagsError, MemoryError):
    """A computation would exceed the configured size cap."""


class SpecError(CDFlagsError, ValueError):
    """A jet-module specification violates its structural constraints."""


class ConfigError(CDFlagsError, ValueError):
    """A run configuration is invalid.

    Parameters
    ----------
    errors : list of str
        Every validation problem found, not just the first one.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
