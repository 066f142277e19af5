"""Exact analysis and simulation of matchmaking queues for online games."""
from .errors import (
    DegenerateModelError,
    DomainError,
    MatchqError,
    ModelError,
    NumericalError,
    TruncationError,
    UnstableError,
)
from .rates import KPlayerRates, Rates2v2, ServiceOrder, SideRates, ZoneRates

__all__ = [
    "DegenerateModelError",
    "DomainError",
    "KPlayerRates",
    "MatchqError",
    "ModelError",
    "NumericalError",
    "Rates2v2",
    "ServiceOrder",
    "SideRates",
    "TruncationError",
    "UnstableError",
    "ZoneRates",
]
