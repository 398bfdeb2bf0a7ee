"""Pricing engine and protocol simulator for hybrid server/peer content delivery.

Premium users are always served from the content provider's server; standard
users fetch from a single designated peer when it holds the content. The
package computes bargaining-equilibrium prices and rewards, compares provider
benefit across audience mixes, extends pricing with a server-load objective,
and validates every closed form against a ledger-keeping simulator.
"""

from hybridprice.errors import (
    DegenerateCohort,
    DuplicateRequest,
    EmptyPool,
    HybridPriceError,
    InvalidCohort,
    InvalidRatio,
    InvalidSchedule,
    MismatchReport,
    NoBargain,
    ParseError,
    UnknownAgent,
    ZeroBenefitWeight,
)
from hybridprice.model import (
    Cohort,
    NormalizedPrices,
    PriceSchedule,
    Scenario,
    classify_scenario,
    denormalize,
    normalize,
    validate,
)

__all__ = [
    "Cohort",
    "DegenerateCohort",
    "DuplicateRequest",
    "EmptyPool",
    "HybridPriceError",
    "InvalidCohort",
    "InvalidRatio",
    "InvalidSchedule",
    "MismatchReport",
    "NoBargain",
    "NormalizedPrices",
    "ParseError",
    "PriceSchedule",
    "Scenario",
    "UnknownAgent",
    "ZeroBenefitWeight",
    "classify_scenario",
    "denormalize",
    "normalize",
    "validate",
]

__version__ = "0.1.0"
