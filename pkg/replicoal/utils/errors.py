class NumericalError(RuntimeError):
    """
    A computation could not produce a trustworthy number.

    The command line front end maps this family to exit code 3.
    """


class SingularMatrixError(NumericalError):
    """Payoff matrix is singular or too ill-conditioned to solve for the fixed point."""


class BoundaryError(NumericalError):
    """Fixed point has a coordinate at or below zero."""


class SimplexUnderflowError(NumericalError):
    """An integrated coordinate fell below zero by more than rounding noise."""


class BudgetExceededError(NumericalError):
    """An exact enumeration would exceed its configured state budget."""


class LeapOvershootError(NumericalError):
    """Tau-leaping kept overshooting the available block counts after repeated step halving."""


class ConfigError(ValueError):
    """
    Experiment configuration is malformed.

    The command line front end maps this to exit code 2.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        """Dotted path of the offending key."""
