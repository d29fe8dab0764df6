"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input violates a documented invariant."""


class CsvFormatError(ValidationError):
    """A CSV file is missing columns or holds unparseable values."""


class OrderingError(ValidationError):
    """Timestamps are not strictly increasing."""


class InfeasibleError(RuntimeError):
    """The requested HPA delivery cannot be produced from the available wind.

    ``max_attainable`` is the largest delivery (kg) the instance permits.
    """

    def __init__(self, message, max_attainable=float("nan")):
        super().__init__(message)
        self.max_attainable = max_attainable
