"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line driver.
"""


class IPPError(Exception):
    """Base class for all package errors."""

    exit_code = 5


class ConfigError(IPPError, ValueError):
    """Invalid input combination or malformed configuration."""

    exit_code = 2


class NoUniformGaps(IPPError):
    """A projected observable spectrum lacks the required gap structure."""

    exit_code = 3

    def __init__(self, message, path=()):
        self.path = tuple(path)
        if self.path:
            message = f"{message} (cluster path {list(self.path)})"
        super().__init__(message)


class GapClosed(IPPError):
    """The requested filling sits inside a degenerate cluster of the Hamiltonian."""

    exit_code = 4


class NumericalError(IPPError):
    """Generic numerical failure."""


class IllConditioned(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NearZeroModulus(NumericalError):
    pass


class TooFewSamples(NumericalError):
    pass


class TrackingAmbiguous(NumericalError):
    pass


class PairingAmbiguous(NumericalError):
    pass


class UndefinedCenter(NumericalError):
    pass
