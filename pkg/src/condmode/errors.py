"""Exception types shared across the package."""


class UsageError(ValueError):
    """Invalid arguments: dimension mismatch, bad weights, empty grids."""


class OutsideSupportError(ArithmeticError):
    """Every kernel weight underflows at the query, even in the log domain."""


class DegenerateDataError(ValueError):
    """Bandwidth selection found no candidate with a finite score."""
