"""Arrival-rate records and service orders.

Rates are validated once, when a record is built; everything downstream
assumes a validated record.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError


def _check_rates(**rates: float) -> None:
    for name, value in rates.items():
        if not math.isfinite(value) or value < 0:
            raise DomainError(f"{name} must be a finite rate >= 0, got {value!r}")
    if sum(rates.values()) <= 0:
        raise DomainError("at least one arrival rate must be positive")


class ServiceOrder(enum.Enum):
    FIFO = "fifo"
    PACKING = "packing"
    LIFO = "lifo"
    TWO_QUEUE = "twoqueue"

    @classmethod
    def parse(cls, value: "ServiceOrder | str") -> "ServiceOrder":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown service order {value!r}") from None


CENTRAL_ORDERS = (ServiceOrder.FIFO, ServiceOrder.PACKING, ServiceOrder.LIFO)


@dataclass(frozen=True)
class KPlayerRates:
    """A k-player game fed by a single Poisson stream of rate ``lam``."""

    k: int
    lam: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be an integer >= 1, got {self.k!r}")
        if not math.isfinite(self.lam) or self.lam <= 0:
            raise DomainError(f"lambda must be positive, got {self.lam!r}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def total(self) -> float:
        return self.lam

    classes = ("player",)

    def class_rates(self) -> tuple[float, ...]:
        return (self.lam,)

    def player_weights(self) -> tuple[float, ...]:
        return (1.0,)


@dataclass(frozen=True)
class Rates2v2:
    """Individual (``lambda1``) and team (``lambda2``) arrival rates of a 2v2 game."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        _check_rates(lambda1=self.lambda1, lambda2=self.lambda2)

    @property
    def total(self) -> float:
        """Player arrival rate; a team brings two players."""
        return self.lambda1 + 2 * self.lambda2

    classes = ("individual", "team")

    def class_rates(self) -> tuple[float, ...]:
        return (self.lambda1, self.lambda2)

    def player_weights(self) -> tuple[float, ...]:
        # share of *players* arriving in each class
        return (self.lambda1 / self.total, 2 * self.lambda2 / self.total)

    @classmethod
    def normalized(cls, individual_share: float) -> "Rates2v2":
        """Rates with total player rate 1 and the given individual share."""
        if not 0 <= individual_share <= 1:
            raise DomainError("individual share must lie in [0, 1]")
        return cls(individual_share, (1 - individual_share) / 2)


@dataclass(frozen=True)
class _ThreeClassRates:
    lambdaA: float
    lambdaB: float
    lambdaC: float

    def __post_init__(self):
        _check_rates(lambdaA=self.lambdaA, lambdaB=self.lambdaB, lambdaC=self.lambdaC)

    @property
    def total(self) -> float:
        return self.lambdaA + self.lambdaB + self.lambdaC

    classes = ("A", "B", "C")

    def class_rates(self) -> tuple[float, ...]:
        return (self.lambdaA, self.lambdaB, self.lambdaC)

    def player_weights(self) -> tuple[float, ...]:
        t = self.total
        return (self.lambdaA / t, self.lambdaB / t, self.lambdaC / t)

    def swapped(self):
        """Same rates with the roles of A and B exchanged."""
        return type(self)(self.lambdaB, self.lambdaA, self.lambdaC)


class SideRates(_ThreeClassRates):
    """Side-selection rates: players preferring side A, side B, or either (C)."""

    @property
    def stable(self) -> bool:
        # lambdaC > |lambdaA - lambdaB|, written as the two drifts so that the
        # test agrees in floating point with the denominators it guards
        a, b, c = self.lambdaA, self.lambdaB, self.lambdaC
        return b + c - a > 0 and a + c - b > 0


class ZoneRates(_ThreeClassRates):
    """Two-zone rates: junior-only (A), advanced-only (B), and either zone (C)."""
