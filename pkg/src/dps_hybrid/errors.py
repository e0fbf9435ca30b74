"""Exception and warning types raised by the precoding routines."""


class ConfigError(ValueError):
    """Invalid scenario configuration.

    Attributes
    ----------
    field : str
        Name of the offending configuration field.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateChannel(ArithmeticError):
    """A channel draw leaves fewer than ``n_streams`` usable dimensions."""


class InsufficientNullSpace(ArithmeticError):
    """The stacked interference matrix has a null space smaller than ``n_streams``."""


class RankDeficient(ArithmeticError):
    """The Procrustes cross-product has rank below the number of RF chains."""


class NonConvergence(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class ZeroMatrix(ValueError):
    """Input matrix is identically zero."""


class ZeroProduct(ValueError):
    """The hybrid product ``F_RF @ F_B`` is identically zero."""


class SingularCovarianceWarning(RuntimeWarning):
    """Interference-plus-noise covariance was singular and got regularized."""
