"""Exception hierarchy shared by every arhbench module."""


class ARHError(ValueError):
    """Base class for all arhbench errors."""


class InvalidIntervalError(ARHError):
    pass


class AliasingError(ARHError):
    """The quadrature grid undersamples the requested sine modes."""


class GridMismatchError(ARHError):
    pass


class DimensionMismatchError(ARHError):
    pass


class InvalidSpecError(ARHError):
    pass


class InstabilityError(InvalidSpecError):
    """The autocorrelation operator has operator norm >= 1."""


class NotPSDError(InvalidSpecError):
    pass


class MonotonicityError(InvalidSpecError):
    pass


class InvalidSampleSizeError(ARHError):
    pass


class DecompositionError(ARHError):
    pass


class ZeroEnergyError(ARHError):
    """A coefficient column has zero empirical energy."""


class TruncationTooDeepError(ARHError):
    """The k_n-th empirical eigenvalue is not strictly positive."""


class RankDeficiencyError(ARHError):
    pass


class NonDyadicLengthError(ARHError):
    pass


class ConfigError(ARHError):
    pass
