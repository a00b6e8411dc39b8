"""Exception hierarchy shared by all modules."""


class MultisepError(Exception):
    """Base class for every error raised by this package."""


class InvalidOrderError(MultisepError, ValueError):
    """Maximum interaction order outside ``[1, n_layers]``."""


class InvalidParameterError(MultisepError, ValueError):
    """Non-finite or wrongly sized parameter vector."""


class ConcordanceError(MultisepError, ValueError):
    """A (multilayer, basis) pair that is not network concordant."""


class InvalidSpecError(MultisepError, ValueError):
    """Basis-network family with out-of-range parameters."""


class CalibrationError(MultisepError, RuntimeError):
    """Latent-space intercept cannot reach the requested density."""


class EstimationError(MultisepError, RuntimeError):
    """Generic estimation failure."""


class NonexistenceError(EstimationError):
    """The estimate diverges to the boundary of the parameter space."""


class SingularHessianError(EstimationError):
    """The Newton system could not be solved."""


class DegenerateModelError(EstimationError):
    """Information matrix is singular by construction (e.g. one layer)."""


class RankError(MultisepError, ValueError):
    """Sample covariance is rank deficient."""


class DataError(MultisepError, ValueError):
    """Malformed input data file."""


class ParseError(DataError):
    """Layer file that cannot be parsed; message carries ``file:line``."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        loc = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{loc}: {message}")


class FormatVersionError(DataError):
    """Saved file with an unknown header or format version."""


class ConfigError(MultisepError, ValueError):
    """Invalid experiment configuration or CLI arguments."""
