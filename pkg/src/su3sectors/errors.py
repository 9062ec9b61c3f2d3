"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes (2 invalid input, 3 resource budget,
4 numerical failure).
"""


class SectorError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(SectorError, ValueError):
    """Arguments violate a documented precondition."""


class BudgetExceededError(SectorError):
    """A requested object would exceed the configured size budget."""

    def __init__(self, what, size, budget):
        self.what = what
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: size {size} exceeds budget {budget}")


class NumericalError(SectorError, RuntimeError):
    """A numerical routine failed or a consistency monitor was breached."""
