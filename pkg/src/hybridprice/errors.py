"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class HybridPriceError(Exception):
    """Base class for every error raised by this package."""


class InvalidSchedule(HybridPriceError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid price schedule: " + "; ".join(self.violations))


class InvalidCohort(HybridPriceError, ValueError):
    pass


class DegenerateCohort(HybridPriceError, ValueError):
    """The cohort is outside the domain of a scenario-specific formula."""


class NoBargain(HybridPriceError):
    """No sharing takes place, so there is nothing to bargain over."""


class ZeroBenefitWeight(HybridPriceError, ValueError):
    pass


class InvalidRatio(HybridPriceError, ValueError):
    pass


class UnknownAgent(HybridPriceError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown agent"


class DuplicateRequest(HybridPriceError, ValueError):
    pass


class MismatchReport(HybridPriceError, AssertionError):
    """Simulator ledger disagrees with a closed-form expression."""

    def __init__(self, mismatches, report=None):
        self.mismatches = list(mismatches)
        self.report = report
        super().__init__("; ".join(self.mismatches))


class ParseError(HybridPriceError, ValueError):
    def __init__(self, message: str, line: int, column: str | int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


class EmptyPool(HybridPriceError, ValueError):
    pass
