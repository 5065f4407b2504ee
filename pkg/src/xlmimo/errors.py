"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid configuration file, key, or parameter range."""


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy/validity contract."""


class SingularMatrixError(NumericalError):
    """Gram matrix of channel estimates is (near-)singular.

    Carries the user ids involved so schedulers can reject the offending
    candidate instead of aborting.
    """

    def __init__(self, message, user_ids=None):
        super().__init__(message)
        self.user_ids = list(user_ids) if user_ids is not None else []
