"""Exception hierarchy.

Configuration problems and numerical failures are kept apart so the CLI can
map them to distinct exit codes.
"""


class WaveguideError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(WaveguideError, ValueError):
    """Invalid or unusable input parameters."""


class NoPropagatingModesError(ConfigurationError):
    pass


class StandingWaveError(ConfigurationError):
    pass


class NarrowbandError(ConfigurationError):
    """The number of propagating modes changes across the frequency band."""


class NumericalError(WaveguideError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class DivergenceError(NumericalError):
    pass


class DegenerateSpectrumError(NumericalError):
    pass


class ModelInconsistencyError(NumericalError):
    pass


class ZeroImageError(NumericalError):
    pass
