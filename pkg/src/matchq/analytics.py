"""Closed-form waiting-time results for the matchmaking models.

Every function takes raw (unnormalized) rates.  Expressions whose name ends
in ``_printed`` are literal transcriptions of published variance formulas;
they are kept for comparison only and disagree with the chain-based values
in :mod:`matchq.ctmc` (see :func:`matchq.ctmc.audit_variance`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateModelError, DomainError, UnstableError
from .rates import CENTRAL_ORDERS, Rates2v2, ServiceOrder, SideRates, ZoneRates


def k_player_mean_wait(k: int, lam: float) -> float:
    """Mean wait when a game starts as soon as ``k`` players are queued."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    return (k - 1) / (2 * lam)


def central_2v2_mean_wait(r: Rates2v2) -> float:
    """Mean wait of a single central 2v2 queue; the same for every service order."""
    if r.lambda1 == 0:
        raise DegenerateModelError(
            "lambda1 = 0 reduces the 2v2 queue to a 2-player game of teams; "
            "use k_player_mean_wait(2, lambda2)"
        )
    return 3 / (2 * r.total)


@dataclass(frozen=True)
class TwoQueueStats:
    mean_individual: float
    mean_team: float
    mean_overall: float
    variance_printed: float


def two_queue_stats(r: Rates2v2) -> TwoQueueStats:
    """Separate queues for individuals (a 4-player game) and teams (a 2-player game)."""
    l1, l2 = r.lambda1, r.lambda2
    if l1 == 0 or l2 == 0:
        raise DomainError("two-queue design needs lambda1 > 0 and lambda2 > 0")
    total = r.total
    var = (3 * l1**2 - l1 * l2 + 11 * l2**2) / (2 * total**2 * l1 * l2)
    return TwoQueueStats(
        mean_individual=3 / (2 * l1),
        mean_team=1 / (2 * l2),
        mean_overall=5 / (2 * total),
        variance_printed=var,
    )


def two_queue_variance_printed_normalized(share: float) -> float:
    """Printed two-queue variance at total rate 1 as a function of lambda1/lambda_total."""
    return two_queue_stats(Rates2v2.normalized(share)).variance_printed


def two_queue_min_variance_ratio() -> float:
    """Individual share lambda1/lambda_total minimising the printed two-queue variance."""
    return 2 * math.sqrt(33) - 11


def central_variance_printed(r: Rates2v2, order: ServiceOrder | str) -> float:
    order = ServiceOrder.parse(order)
    if order not in CENTRAL_ORDERS:
        raise DomainError(f"{order.value} is not a central-queue order; use two_queue_stats")
    l1, l2 = r.lambda1, r.lambda2
    if l1 <= 0:
        raise DomainError("printed central-queue variances need lambda1 > 0")
    total = r.total
    mean = 3 / (2 * total)
    s = l1 + l2
    if order is ServiceOrder.LIFO:
        return (
            (5 * l1**3 * l2 + 7 * l1**2 * l2**2 + 10 * l1 * l2**3 + 2 * l2**4)
            / (2 * l1 * s**3 * (l1**2 + 2 * l1 * l2 + 2 * l2**2))
            + (8 * l1**2 + 7 * l1 * l2) / (2 * s**4)
            - mean**2
        )
    return (
        (7 * l1**2 + l1 * l2 + 4 * l2**2) / (2 * l1 * s**3)
        - (2 * l1 * l2**3 + 3 * l2**4) / (l1 * total * s**4)
        - mean**2
    )


@dataclass(frozen=True)
class ChoiceStats:
    """Per-class mean waits for the side-selection and two-zone models.

    ``improvement_factor`` is E[T_C] / E[T_B], the fraction of the B-class wait
    a choice-free player still incurs.
    """

    pi0: float
    mean_a: float
    mean_b: float
    mean_c: float
    mean_overall: float
    improvement_factor: float


def side_selection_stats(r: SideRates) -> ChoiceStats:
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    if not r.stable:
        raise UnstableError(
            f"side-selection chain is not positive recurrent: need lambdaC > |lambdaA - lambdaB| "
            f"(got {lc} vs {abs(la - lb)}); mean waits are unbounded"
        )
    total = r.total
    pi0 = 1 / (la / (lb + lc - la) + lb / (la + lc - lb) + lc / total + 1)
    mean_a = (lb + lc) * pi0 / (lb + lc - la) ** 2
    mean_b = (la + lc) * pi0 / (la + lc - lb) ** 2
    mean_c = pi0 / total
    mean_overall = (
        1 / (2 * (la + lc - lb))
        + 1 / (2 * (lb + lc - la))
        + 1 / total
        - 1 / (2 * lc)
        - (la + lb + 2 * lc) / (2 * (2 * la * lb + la * lc + lb * lc + lc**2))
    )
    q = (total - 2 * lb) ** 2 / (total * (total - lb))
    return ChoiceStats(pi0, mean_a, mean_b, mean_c, mean_overall, q)


def side_selection_improvement(lambdaB: float, total: float = 1.0) -> float:
    """Improvement factor of the side-selection model as a function of lambdaB alone."""
    return (total - 2 * lambdaB) ** 2 / (total * (total - lambdaB))


def side_selection_q_derivative(lambdaB: float) -> float:
    """d q / d lambdaB at lambda_total = 1, valid for 0 < lambdaB < 0.5."""
    if not 0 < lambdaB < 0.5:
        raise DomainError(f"lambdaB must lie in (0, 0.5) with unit total rate, got {lambdaB!r}")
    return 1 / (1 - lambdaB) ** 2 - 4


def _check_zone_domain(r: ZoneRates) -> None:
    if r.lambdaA + r.lambdaC == 0 or r.lambdaB + r.lambdaC == 0:
        raise DomainError(
            "two-zone model needs lambdaA + lambdaC > 0 and lambdaB + lambdaC > 0"
        )


def two_zone_stationary(r: ZoneRates) -> dict[str, float]:
    """Stationary distribution of the two-zone chain keyed by state label."""
    _check_zone_domain(r)
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    total = r.total
    rel = {
        "0": 1.0,
        "A": la / (la + lc),
        "B": lb / (lb + lc),
        "AB": la * lb / ((la + lc) * total),
        "BA": la * lb / ((lb + lc) * total),
        "C": lc / total,
    }
    pi0 = 1 / sum(rel.values())
    return {state: v * pi0 for state, v in rel.items()}


def two_zone_stats(r: ZoneRates) -> ChoiceStats:
    _check_zone_domain(r)
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    total = r.total
    pi0 = two_zone_stationary(r)["0"]
    denom = (la + lc) * (lb + lc) * total
    mean_a = (2 * la * lb + la * lc + 2 * lb**2 + 4 * lb * lc + lc**2) / denom * pi0
    mean_b = (2 * la * lb + lb * lc + 2 * la**2 + 4 * la * lc + lc**2) / denom * pi0
    mean_c = pi0 / total
    mean_overall = (la * mean_a + lb * mean_b + lc * mean_c) / total
    q = (la + lc) * (lb + lc) / (2 * la**2 + 2 * la * lb + 4 * la * lc + lb * lc + lc**2)
    return ChoiceStats(pi0, mean_a, mean_b, mean_c, mean_overall, q)
