"""Finite continuous-time Markov chains for the matchmaking models.

Three pieces live here:

* :class:`CtmcModel` plus builders for every chain of the models (k-player
  cycle, the 2v2 central queue, the truncated side-selection chain and the
  two-zone chain), and a dense stationary solver.
* Tagged-customer chains.  The remaining wait of one arriving player is the
  absorption time of a chain whose state is the queue composition together
  with the player's own position.  The arrival sees the stationary
  distribution (Poisson arrivals see time averages), so mixing the absorption
  moments over that distribution gives the per-class wait moments.
* The variance audit comparing published variance expressions with the
  chain-based values.

First-step analysis gives both moments.  With holding rate ``L`` in a
transient state and jump probabilities ``p``, the wait is ``T = H + T'`` with
``H ~ Exp(L)`` independent of the next state, hence::

    m1(s) = 1/L + sum p(s->s') m1(s')
    m2(s) = 2/L**2 + (2/L) sum p(s->s') m1(s') + sum p(s->s') m2(s')

and both vanish at absorption.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import analytics
from .errors import DomainError, ModelError, NumericalError, TruncationError
from .rates import (
    CENTRAL_ORDERS,
    KPlayerRates,
    Rates2v2,
    ServiceOrder,
    SideRates,
    ZoneRates,
)

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CtmcModel:
    """Labelled states and a sparse list of ``(from, to, rate)`` transitions."""

    states: tuple[Hashable, ...]
    transitions: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = len(self.states)
        if len(set(self.states)) != n:
            raise ModelError("state labels must be unique")
        for i, j, rate in self.transitions:
            if not (0 <= i < n and 0 <= j < n):
                raise ModelError(f"transition ({i}, {j}) references a missing state")
            if i == j:
                raise ModelError(f"self-loop at state {self.states[i]!r}")
            if not rate > 0:
                raise ModelError(f"transition rates must be positive, got {rate!r}")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[Hashable, Hashable, float]],
                   root: Hashable = 0) -> "CtmcModel":
        """Build from labelled edges, dropping zero-rate edges and merging parallel ones.

        Only states reachable from ``root`` are kept, so zero rates never leave
        dead states behind.
        """
        merged: dict[tuple[Hashable, Hashable], float] = {}
        for a, b, rate in edges:
            if rate > 0:
                merged[a, b] = merged.get((a, b), 0.0) + rate
        adjacency: dict[Hashable, list[Hashable]] = {}
        for a, b in merged:
            adjacency.setdefault(a, []).append(b)
        order = [root]
        seen = {root}
        queue = deque([root])
        while queue:
            for b in adjacency.get(queue.popleft(), ()):
                if b not in seen:
                    seen.add(b)
                    order.append(b)
                    queue.append(b)
        index = {s: i for i, s in enumerate(order)}
        transitions = tuple(
            (index[a], index[b], rate) for (a, b), rate in merged.items() if a in seen
        )
        return cls(tuple(order), transitions)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def index(self, label: Hashable) -> int:
        return self.states.index(label)

    def generator(self) -> np.ndarray:
        """Dense infinitesimal generator ``Q`` (rows sum to zero)."""
        n = self.n_states
        q = np.zeros((n, n))
        for i, j, rate in self.transitions:
            q[i, j] += rate
        q[np.diag_indices(n)] = -q.sum(axis=1)
        return q

    def rate(self, a: Hashable, b: Hashable) -> float:
        i, j = self.index(a), self.index(b)
        return sum(r for s, t, r in self.transitions if s == i and t == j)

    def is_irreducible(self) -> bool:
        n = self.n_states
        fwd = [[] for _ in range(n)]
        back = [[] for _ in range(n)]
        for i, j, _ in self.transitions:
            fwd[i].append(j)
            back[j].append(i)
        return all(len(_reach(adj, 0)) == n for adj in (fwd, back))


def _reach(adj: Sequence[Sequence[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


@dataclass(frozen=True)
class StationaryDist:
    states: tuple[Hashable, ...]
    probabilities: np.ndarray
    residual: float

    def __getitem__(self, label: Hashable) -> float:
        return float(self.probabilities[self.states.index(label)])

    def as_dict(self) -> dict[Hashable, float]:
        return {s: float(p) for s, p in zip(self.states, self.probabilities)}


def stationary(model: CtmcModel) -> StationaryDist:
    """Solve ``pi Q = 0`` with one balance equation replaced by normalisation."""
    if model.n_states == 1:
        return StationaryDist(model.states, np.ones(1), 0.0)
    if not model.is_irreducible():
        raise ModelError("stationary distribution requested for a reducible chain")
    q = model.generator()
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(model.n_states)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"balance equations are singular: {exc}") from exc
    residual = float(np.max(np.abs(pi @ q)))
    if residual > RESIDUAL_TOL or np.min(pi) < -RESIDUAL_TOL:
        raise NumericalError(f"stationary solve residual {residual:.3e} too large")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return StationaryDist(model.states, pi, residual)


# --- model builders -------------------------------------------------------

def kplayer_model(r: KPlayerRates) -> CtmcModel:
    """Cycle 0 -> 1 -> ... -> k-1 -> 0, every edge at rate lambda."""
    k = r.k
    if k == 1:
        return CtmcModel((0,), ())
    return CtmcModel.from_edges((i, (i + 1) % k, r.lam) for i in range(k))


def central_model(r: Rates2v2, detailed: bool = True) -> CtmcModel:
    """Single central 2v2 queue.

    ``detailed=True`` separates all-individual states (2a, 3a) from states
    holding a team (2b, 3b); the chain is the same for FIFO, Packing and LIFO.
    ``detailed=False`` gives the coarse chain on the player count 0..3.
    """
    l1, l2 = r.lambda1, r.lambda2
    if not detailed:
        edges = [(i, (i + 1) % 4, l1) for i in range(4)]
        edges += [(0, 2, l2), (1, 3, l2), (2, 0, l2), (3, 1, l2)]
        return CtmcModel.from_edges(edges)
    edges = [
        ("0", "1", l1), ("1", "2a", l1), ("2a", "3a", l1), ("3a", "0", l1),
        ("2b", "3b", l1), ("3b", "0", l1),
        ("0", "2b", l2), ("1", "3b", l2), ("2a", "0", l2), ("3a", "1", l2),
        ("2b", "0", l2), ("3b", "1", l2),
    ]
    return CtmcModel.from_edges(edges, root="0")


CHOICE_FREE_STATE = "1'"


def side_selection_model(r: SideRates, truncation: int) -> CtmcModel:
    """Side-selection chain restricted to ``|i| <= truncation``.

    State ``i > 0`` holds ``i`` waiting side-A players, ``i < 0`` holds ``-i``
    side-B players, and ``1'`` a lone choice-free player.  Arrivals that would
    leave the window are dropped.  A published drawing labels the 1 -> 2 edge
    lambda_1; it is lambda_A like its neighbours.
    """
    if truncation is None or int(truncation) != truncation or truncation < 1:
        raise DomainError("side-selection chain is infinite; pass a truncation level N >= 1")
    n = int(truncation)
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    edges = []
    for i in range(n):
        edges.append((i, i + 1, la))
        edges.append((i + 1, i, lb + lc))
        edges.append((-i, -i - 1, lb))
        edges.append((-i - 1, -i, la + lc))
    edges.append((0, CHOICE_FREE_STATE, lc))
    edges.append((CHOICE_FREE_STATE, 0, r.total))
    return CtmcModel.from_edges(edges, root=0)


def two_zone_model(r: ZoneRates) -> CtmcModel:
    """Two-zone chain on {0, A, B, C, AB, BA}; AB means the zone-A player came first."""
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    edges = [
        ("0", "A", la), ("0", "B", lb), ("0", "C", lc),
        ("A", "0", la + lc), ("A", "AB", lb),
        ("B", "0", lb + lc), ("B", "BA", la),
        ("AB", "A", lb), ("AB", "B", la + lc),
        ("BA", "B", la), ("BA", "A", lb + lc),
        ("C", "0", r.total),
    ]
    return CtmcModel.from_edges(edges, root="0")


def build_model(rates, truncation: int | None = None, **kwargs) -> CtmcModel:
    """Dispatch on the rate record type to the matching chain builder."""
    if isinstance(rates, KPlayerRates):
        return kplayer_model(rates)
    if isinstance(rates, Rates2v2):
        return central_model(rates, **kwargs)
    if isinstance(rates, SideRates):
        return side_selection_model(rates, truncation)
    if isinstance(rates, ZoneRates):
        return two_zone_model(rates)
    raise DomainError(f"no chain for rate record {type(rates).__name__}")


# --- tagged-customer chains ------------------------------------------------

ABSORB = -1


@dataclass
class TaggedChain:
    """Remaining-wait chain of a single tagged arrival.

    ``entry`` maps transient tagged states to the probability that the arrival
    lands there; ``immediate`` is the probability of being matched on arrival.
    Transitions go to a transient label or to ``ABSORB``.
    """

    states: list[Hashable] = field(default_factory=list)
    transitions: list[tuple[int, int, float]] = field(default_factory=list)
    entry: dict[int, float] = field(default_factory=dict)
    immediate: float = 0.0

    def state(self, label: Hashable) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            self.states.append(label)
            return len(self.states) - 1

    def add(self, a: Hashable, b: Hashable, rate: float) -> None:
        if rate <= 0:
            return
        j = ABSORB if b is ABSORB else self.state(b)
        self.transitions.append((self.state(a), j, rate))

    def enter(self, label: Hashable | None, prob: float) -> None:
        if prob <= 0:
            return
        if label is None:
            self.immediate += prob
        else:
            i = self.state(label)
            self.entry[i] = self.entry.get(i, 0.0) + prob


@dataclass(frozen=True)
class Moments:
    mean: float
    second_moment: float

    @property
    def variance(self) -> float:
        return max(self.second_moment - self.mean**2, 0.0)


def absorption_moments(chain: TaggedChain) -> tuple[np.ndarray, np.ndarray]:
    """First and second absorption-time moments from every transient state."""
    n = len(chain.states)
    if n == 0:
        return np.zeros(0), np.zeros(0)
    out_rate = np.zeros(n)
    rates = np.zeros((n, n))
    for i, j, r in chain.transitions:
        out_rate[i] += r
        if j != ABSORB:
            rates[i, j] += r
    if np.any(out_rate <= 0):
        raise ModelError("tagged chain has a transient state with no way out")
    p = rates / out_rate[:, None]
    a = np.eye(n) - p
    # absorption must be certain: I - P is then nonsingular
    try:
        m1 = np.linalg.solve(a, 1 / out_rate)
        m2 = np.linalg.solve(a, 2 / out_rate**2 + (2 / out_rate) * (p @ m1))
    except np.linalg.LinAlgError as exc:
        raise ModelError("absorption is not certain from every tagged state") from exc
    if not (np.all(np.isfinite(m1)) and np.all(m1 > 0)):
        raise ModelError("absorption is not certain from every tagged state")
    return m1, m2


def chain_moments(chain: TaggedChain) -> Moments:
    m1, m2 = absorption_moments(chain)
    total = chain.immediate + sum(chain.entry.values())
    if not math.isclose(total, 1.0, abs_tol=1e-9):
        raise ModelError(f"tagged entry distribution sums to {total}")
    mean = sum(p * m1[i] for i, p in chain.entry.items()) / total
    second = sum(p * m2[i] for i, p in chain.entry.items()) / total
    return Moments(mean, second)


def _kplayer_chain(k: int, lam: float) -> TaggedChain:
    # tagged state = number of further arrivals needed; the queue seen on
    # arrival is uniform on 0..k-1
    chain = TaggedChain()
    for need in range(1, k):
        chain.add(need, need - 1 if need > 1 else ABSORB, lam)
    for seen in range(k):
        chain.enter(k - 1 - seen if seen < k - 1 else None, 1 / k)
    return chain


def _central_chain(r: Rates2v2, cls: str, order: ServiceOrder) -> TaggedChain:
    """Tagged chain of the central 2v2 queue.

    Tagged states are ``(individuals, has_team, rank)`` where ``rank`` is the
    tagged individual's arrival rank among queued individuals (0 for a tagged
    team).  The only order-dependent event is a team arriving to three queued
    individuals: FIFO/Packing release the oldest two, LIFO the newest two.
    """
    l1, l2 = r.lambda1, r.lambda2
    pi = stationary(central_model(r)).as_dict()
    chain = TaggedChain()
    if cls == "individual":
        chain.enter((1, False, 1), pi.get("0", 0.0))
        chain.enter((2, False, 2), pi.get("1", 0.0))
        chain.enter((3, False, 3), pi.get("2a", 0.0))
        chain.enter((1, True, 1), pi.get("2b", 0.0))
        chain.enter(None, pi.get("3a", 0.0) + pi.get("3b", 0.0))
        chain.add((1, False, 1), (2, False, 1), l1)
        chain.add((1, False, 1), (1, True, 1), l2)
        for rank in (1, 2):
            chain.add((2, False, rank), (3, False, rank), l1)
            chain.add((2, False, rank), ABSORB, l2)
        for rank in (1, 2, 3):
            chain.add((3, False, rank), ABSORB, l1)
            survivor = 1 if order is ServiceOrder.LIFO else 3
            chain.add((3, False, rank), (1, False, 1) if rank == survivor else ABSORB, l2)
        chain.add((1, True, 1), ABSORB, l1)
        chain.add((1, True, 1), (1, False, 1), l2)
    elif cls == "team":
        chain.enter((0, True, 0), pi.get("0", 0.0))
        chain.enter((1, True, 0), pi.get("1", 0.0))
        chain.enter(None, sum(pi.get(s, 0.0) for s in ("2a", "2b", "3a", "3b")))
        chain.add((0, True, 0), (1, True, 0), l1)
        chain.add((0, True, 0), ABSORB, l2)
        chain.add((1, True, 0), ABSORB, l1)
        # two teams meet; the queued individual stays behind
        chain.add((1, True, 0), ABSORB, l2)
    else:
        raise DomainError(f"unknown 2v2 class {cls!r}")
    return chain


def _side_chain(r: SideRates, cls: str, truncation: int) -> TaggedChain:
    """Tagged chain of the truncated side-selection model, FIFO within a side.

    A side-A player arriving to ``i >= 0`` waiting A players needs ``i + 1``
    arrivals that can face side A (B or choice-free).  Arrivals blocked at the
    truncation boundary are conditioned away.
    """
    pi = stationary(side_selection_model(r, truncation)).as_dict()
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    chain = TaggedChain()
    if cls == "C":
        chain.enter("wait", pi.get(0, 0.0))
        chain.enter(None, 1 - pi.get(0, 0.0))
        chain.add("wait", ABSORB, r.total)
        return chain
    if cls not in ("A", "B"):
        raise DomainError(f"unknown side-selection class {cls!r}")
    sign, partner_rate = (1, lb + lc) if cls == "A" else (-1, la + lc)
    blocked = pi.get(sign * truncation, 0.0)
    accepted = 1 - blocked
    for i in range(truncation):
        p = pi.get(sign * i, 0.0)
        chain.enter(i + 1, p / accepted)
    chain.enter(None, (accepted - sum(pi.get(sign * i, 0.0) for i in range(truncation))) / accepted)
    for need in range(1, truncation + 1):
        chain.add(need, need - 1 if need > 1 else ABSORB, partner_rate)
    return chain


def _zone_chain(r: ZoneRates, cls: str) -> TaggedChain:
    """Tagged chain of the two-zone model.

    Tagged states: ``own`` (alone in its zone), ``own_first`` (the other zone
    also has a player who came later) and ``other_first`` (the other zone's
    player came earlier).  A choice-free arrival matches whoever came first.
    """
    pi = stationary(two_zone_model(r)).as_dict()
    chain = TaggedChain()
    total = r.total
    if cls == "C":
        chain.enter("wait", pi.get("0", 0.0))
        chain.enter(None, 1 - pi.get("0", 0.0))
        chain.add("wait", ABSORB, total)
        return chain
    if cls == "A":
        own, other, alone_other = r.lambdaA, r.lambdaB, "B"
    elif cls == "B":
        own, other, alone_other = r.lambdaB, r.lambdaA, "A"
    else:
        raise DomainError(f"unknown two-zone class {cls!r}")
    lc = r.lambdaC
    chain.enter("own", pi.get("0", 0.0))
    chain.enter("other_first", pi.get(alone_other, 0.0))
    chain.enter(None, 1 - pi.get("0", 0.0) - pi.get(alone_other, 0.0))
    chain.add("own", ABSORB, own + lc)
    chain.add("own", "own_first", other)
    chain.add("own_first", ABSORB, own + lc)
    chain.add("own_first", "own", other)
    chain.add("other_first", ABSORB, own)
    chain.add("other_first", "own", other + lc)
    return chain


def class_moments(rates, cls: str, order: ServiceOrder | str = ServiceOrder.FIFO,
                  truncation: int | None = None) -> Moments:
    """Wait moments for one arrival class."""
    order = ServiceOrder.parse(order)
    if isinstance(rates, KPlayerRates):
        if cls != "player":
            raise DomainError(f"k-player model has no class {cls!r}")
        return chain_moments(_kplayer_chain(rates.k, rates.lam))
    if isinstance(rates, Rates2v2):
        if order is ServiceOrder.TWO_QUEUE:
            if cls == "individual":
                if rates.lambda1 == 0:
                    raise DomainError("no individual arrivals")
                return chain_moments(_kplayer_chain(4, rates.lambda1))
            if cls == "team":
                if rates.lambda2 == 0:
                    raise DomainError("no team arrivals")
                return chain_moments(_kplayer_chain(2, rates.lambda2))
            raise DomainError(f"unknown 2v2 class {cls!r}")
        return chain_moments(_central_chain(rates, cls, order))
    if isinstance(rates, SideRates):
        if truncation is None:
            raise DomainError("side-selection moments need a truncation level")
        return chain_moments(_side_chain(rates, cls, truncation))
    if isinstance(rates, ZoneRates):
        analytics._check_zone_domain(rates)
        return chain_moments(_zone_chain(rates, cls))
    raise DomainError(f"no tagged chain for {type(rates).__name__}")


@dataclass(frozen=True)
class WaitMoments:
    mean: float
    second_moment: float
    variance: float
    per_class: dict[str, Moments]


def tagged_wait_moments(rates, cls: str | None = None,
                        order: ServiceOrder | str = ServiceOrder.FIFO,
                        truncation: int | None = None) -> WaitMoments:
    """Wait moments of one class, or of all players mixed by their arrival share.

    Team waits count once per player, so a team carries twice its arrival rate.
    """
    classes = [cls] if cls is not None else [
        c for c, w in zip(rates.classes, rates.player_weights()) if w > 0
    ]
    per_class = {c: class_moments(rates, c, order, truncation) for c in classes}
    if cls is not None:
        m = per_class[cls]
    else:
        weights = dict(zip(rates.classes, rates.player_weights()))
        m = Moments(
            sum(weights[c] * per_class[c].mean for c in classes),
            sum(weights[c] * per_class[c].second_moment for c in classes),
        )
    return WaitMoments(m.mean, m.second_moment, m.variance, per_class)


# --- truncated side-selection solve ---------------------------------------

@dataclass(frozen=True)
class SideWaits:
    mean_a: float
    mean_b: float
    mean_c: float
    mean_overall: float
    boundary_mass: float
    truncation: int


def truncated_side_waits(r: SideRates, truncation: int,
                         max_boundary_mass: float | None = None) -> SideWaits:
    """Per-class mean waits from Little's law on the truncated chain.

    Arrivals lost at the boundary are excluded from the accepted arrival rate.
    ``boundary_mass`` (stationary mass at ``|i| = N``) measures truncation error.
    """
    pi = stationary(side_selection_model(r, truncation)).as_dict()
    n = truncation
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    boundary = pi.get(n, 0.0) + pi.get(-n, 0.0)
    if max_boundary_mass is not None and boundary > max_boundary_mass:
        raise TruncationError(
            f"boundary mass {boundary:.3e} exceeds {max_boundary_mass:.3e} at N={n}"
        )
    queue_a = sum(i * pi.get(i, 0.0) for i in range(1, n + 1))
    queue_b = sum(i * pi.get(-i, 0.0) for i in range(1, n + 1))
    p0 = pi.get(0, 0.0)
    mean_a = queue_a / (la * (1 - pi.get(n, 0.0))) if la > 0 else math.nan
    mean_b = queue_b / (lb * (1 - pi.get(-n, 0.0))) if lb > 0 else math.nan
    mean_c = p0 / r.total
    overall = (queue_a + queue_b + (lc * mean_c if lc > 0 else 0.0)) / (
        r.total - la * pi.get(n, 0.0) - lb * pi.get(-n, 0.0)
    )
    return SideWaits(mean_a, mean_b, mean_c, overall, boundary, n)


def converged_side_waits(r: SideRates, tol: float = 1e-10, start: int = 8,
                         max_truncation: int = 200) -> SideWaits:
    """Grow the truncation level until boundary mass drops below ``tol``."""
    n = start
    while True:
        n = min(n, max_truncation)
        result = truncated_side_waits(r, n)
        if result.boundary_mass < tol:
            return result
        if n >= max_truncation:
            raise TruncationError(
                f"boundary mass {result.boundary_mass:.3e} still above {tol:.1e} "
                f"at N={max_truncation}"
            )
        n *= 2


def side_detailed_balance_residuals(r: SideRates, pi: StationaryDist,
                                    interior: int | None = None) -> np.ndarray:
    """Residuals of the cut (time-reversibility) equations of the side chain.

    ``lambdaA pi_i = (lambdaB + lambdaC) pi_{i+1}`` for ``i >= 0``, its mirror
    image for B, and ``lambdaC pi_0 = lambda_total pi_1'``.
    """
    p = pi.as_dict()
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    top = max(s for s in p if isinstance(s, int))
    bottom = -min(s for s in p if isinstance(s, int))
    limit_a = top if interior is None else min(top, interior)
    limit_b = bottom if interior is None else min(bottom, interior)
    res = [la * p.get(i, 0.0) - (lb + lc) * p.get(i + 1, 0.0) for i in range(limit_a)]
    res += [lb * p.get(-i, 0.0) - (la + lc) * p.get(-i - 1, 0.0) for i in range(limit_b)]
    res.append(lc * p.get(0, 0.0) - r.total * p.get(CHOICE_FREE_STATE, 0.0))
    return np.abs(np.asarray(res))


def two_zone_balance_residuals(r: ZoneRates, pi: dict[str, float]) -> np.ndarray:
    """Residuals of the six global balance equations of the two-zone chain."""
    la, lb, lc = r.lambdaA, r.lambdaB, r.lambdaC
    t = r.total
    g = lambda s: pi.get(s, 0.0)  # noqa: E731
    return np.abs(np.array([
        t * g("0") - (t * g("C") + (la + lc) * g("A") + (lb + lc) * g("B")),
        t * g("A") - (la * g("0") + lb * g("AB") + (lb + lc) * g("BA")),
        t * g("B") - (lb * g("0") + la * g("BA") + (la + lc) * g("AB")),
        t * g("AB") - lb * g("A"),
        t * g("BA") - la * g("B"),
        t * g("C") - lc * g("0"),
    ]))


# --- variance audit ----------------------------------------------------------

@dataclass(frozen=True)
class AuditRow:
    lambda1: float
    lambda2: float
    order: ServiceOrder
    printed: float | None
    oracle_mean: float
    oracle_variance: float
    abs_gap: float | None
    rel_gap: float | None
    litmus: bool

    def as_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "order": self.order.value,
            "printed_variance": self.printed,
            "oracle_mean": self.oracle_mean,
            "oracle_variance": self.oracle_variance,
            "abs_gap": self.abs_gap,
            "rel_gap": self.rel_gap,
            "litmus": self.litmus,
        }


AUDIT_ORDERS = CENTRAL_ORDERS + (ServiceOrder.TWO_QUEUE,)


def audit_variance(grid: Iterable[Rates2v2]) -> list[AuditRow]:
    """Printed variance expressions next to the tagged-chain variance.

    Rows at ``lambda2 = 0`` are flagged: no teams arrive, so every central
    order behaves identically and any printed disagreement is an erratum.
    Printed values are ``None`` where the expression is undefined.
    """
    rows = []
    for r in grid:
        for order in AUDIT_ORDERS:
            if order is ServiceOrder.TWO_QUEUE:
                if r.lambda1 == 0 or r.lambda2 == 0:
                    continue
                printed = analytics.two_queue_stats(r).variance_printed
            else:
                printed = analytics.central_variance_printed(r, order) if r.lambda1 > 0 else None
            m = tagged_wait_moments(r, order=order)
            gap = None if printed is None else printed - m.variance
            rel = None if gap is None else abs(gap) / m.variance
            rows.append(AuditRow(r.lambda1, r.lambda2, order, printed, m.mean,
                                 m.variance, gap, rel, r.lambda2 == 0 and r.lambda1 > 0))
    return rows


def default_audit_grid() -> list[Rates2v2]:
    return [Rates2v2.normalized(i / 10) for i in range(11)]
