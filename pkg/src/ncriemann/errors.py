"""Exception types shared by the package."""


class NCRError(Exception):
    """Base class for all package errors."""


class DomainError(NCRError, ValueError):
    """A function is undefined on a set of positive measure."""


class NoCutError(NCRError, ValueError):
    """No Riemann cut exists (the input is not Riemann measurable)."""


class PrecisionError(NCRError, ArithmeticError):
    """No admissible level was found at working precision."""


class NoSDDError(NCRError, ValueError):
    """The function admits no strongly dense domain."""


class CutError(NCRError, ValueError):
    """A supplied cut family fails its certificate."""


class NoLimitError(NCRError, ArithmeticError):
    """A plain limit was requested but the values do not converge."""


class NotEccentricError(NCRError, ValueError):
    """The normalizing operator is not eccentric, so no singular trace exists."""


class BudgetError(NCRError, ValueError):
    """Exhaustive enumeration would exceed the configured budget."""
