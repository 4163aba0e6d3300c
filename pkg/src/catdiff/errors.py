"""Exception types shared across the package."""


class CatdiffError(Exception):
    """Base class for all catdiff-specific errors."""


class DimensionError(CatdiffError, ValueError):
    """A category, group, or variable index is out of range or misshaped."""


class CapacityError(CatdiffError, ValueError):
    """An enumeration was requested on a space above the documented cell limit."""


class NumericalDegeneracyError(CatdiffError, ArithmeticError):
    """A computation hit an all-zero probability configuration."""


class IngestionError(CatdiffError):
    """A dataset (or dataset-like file) failed validation; message is row/column addressed."""
