class HolifdError(Exception):
    """Base class for all errors raised by holifd"""


class ConfigError(HolifdError):
    pass


class GridMismatchError(HolifdError):
    pass


class DomainError(HolifdError):
    pass


class StabilityError(HolifdError):
    pass


class BlowUpError(HolifdError):
    def __init__(self, message: str, t: float = None, step: int = None):
        super().__init__(message)
        self.t = t
        self.step = step


class ConvergenceError(HolifdError):
    def __init__(self, message: str, last_iterate=None, residual: float = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class DerivationError(HolifdError):
    def __init__(self, message: str, order: int = None, constraint: str = None):
        super().__init__(message)
        self.order = order
        self.constraint = constraint


class AcceptanceError(HolifdError):
    pass
