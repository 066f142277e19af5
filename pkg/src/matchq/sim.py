"""Seeded simulation of the matchmaking mechanisms.

Games launch the instant a launch condition holds, and that instant is
always an arrival, so the only events are arrivals.  Each replication draws
one merged Poisson stream (exponential gaps, class by thinning) and feeds it
to a compiled matching kernel which records, for every arrival, the index of
the arrival that completed its game.  Waits are then the time difference.

Runs draw from a counter-based Philox generator seeded with
``(seed, replication)``, so identical configs give identical streams and
replications can run in any order or in parallel.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from . import stats
from .errors import DomainError
from .rates import (
    CENTRAL_ORDERS,
    KPlayerRates,
    Rates2v2,
    ServiceOrder,
    SideRates,
    ZoneRates,
)

DEFAULT_WARMUP = 10_000


class Mechanism(enum.Enum):
    KPLAYER = "kplayer"
    CENTRAL = "central"
    TWO_QUEUE = "twoqueue"
    SIDE_SELECTION = "sides"
    TWO_ZONE = "zones"


_RATE_TYPES = {
    Mechanism.KPLAYER: KPlayerRates,
    Mechanism.CENTRAL: Rates2v2,
    Mechanism.TWO_QUEUE: Rates2v2,
    Mechanism.SIDE_SELECTION: SideRates,
    Mechanism.TWO_ZONE: ZoneRates,
}


@dataclass(frozen=True)
class PolicySpec:
    mechanism: Mechanism
    order: ServiceOrder = ServiceOrder.FIFO

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        order = ServiceOrder.parse(self.order)
        if self.mechanism is Mechanism.CENTRAL:
            if order not in CENTRAL_ORDERS:
                raise DomainError("central queue needs order fifo, packing or lifo")
        elif self.mechanism is Mechanism.TWO_QUEUE:
            order = ServiceOrder.TWO_QUEUE
        else:
            # matching within k-player, side and zone queues is first-come first-served
            order = ServiceOrder.FIFO
        object.__setattr__(self, "order", order)


@dataclass(frozen=True)
class ExperimentConfig:
    policy: PolicySpec
    rates: object
    arrivals: int
    warmup: int = DEFAULT_WARMUP
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        expected = _RATE_TYPES[self.policy.mechanism]
        if not isinstance(self.rates, expected):
            raise DomainError(
                f"{self.policy.mechanism.value} needs {expected.__name__}, "
                f"got {type(self.rates).__name__}"
            )
        if self.arrivals < 1 or self.replications < 1 or self.warmup < 0:
            raise DomainError("need arrivals >= 1, replications >= 1 and warmup >= 0")
        if self.seed < 0:
            raise DomainError("seed must be a non-negative integer")
        if self.policy.mechanism is Mechanism.TWO_QUEUE and 0 in self.rates.class_rates():
            raise DomainError("two-queue design needs lambda1 > 0 and lambda2 > 0")

    @property
    def stable(self) -> bool:
        if isinstance(self.rates, SideRates):
            return self.rates.stable
        return True

    def as_dict(self) -> dict:
        rates = self.rates
        if isinstance(rates, KPlayerRates):
            rate_doc = {"k": rates.k, "lambda": rates.lam}
        elif isinstance(rates, Rates2v2):
            rate_doc = {"lambda1": rates.lambda1, "lambda2": rates.lambda2}
        else:
            rate_doc = {"lambdaA": rates.lambdaA, "lambdaB": rates.lambdaB,
                        "lambdaC": rates.lambdaC}
        return {
            "mechanism": self.policy.mechanism.value,
            "order": self.policy.order.value,
            "rates": rate_doc,
            "arrivals": self.arrivals,
            "warmup": self.warmup,
            "seed": self.seed,
            "replications": self.replications,
        }


# --- matching kernels ------------------------------------------------------
# Each kernel fills ``match[i]`` with the index of the arrival that launched
# arrival i's game (-1 while unmatched) and returns the number of games.

@njit(cache=True)
def _kplayer_kernel(n, k, match):
    waiting = np.empty(k, np.int64)
    size = 0
    games = 0
    for i in range(n):
        waiting[size] = i
        size += 1
        if size == k:
            for j in range(k):
                match[waiting[j]] = i
            size = 0
            games += 1
    return games


@njit(cache=True)
def _central_kernel(classes, lifo, match):
    # individuals in arrival order; at most one team can be queued
    ind = np.empty(3, np.int64)
    n_ind = 0
    team = -1
    games = 0
    for i in range(classes.size):
        if classes[i] == 0:
            if team >= 0 and n_ind == 1:
                match[ind[0]] = i
                match[team] = i
                match[i] = i
                n_ind = 0
                team = -1
                games += 1
            elif n_ind == 3:
                for j in range(3):
                    match[ind[j]] = i
                match[i] = i
                n_ind = 0
                games += 1
            else:
                ind[n_ind] = i
                n_ind += 1
        else:
            if team >= 0:
                # two teams meet; a queued individual stays
                match[team] = i
                match[i] = i
                team = -1
                games += 1
            elif n_ind == 2:
                match[ind[0]] = i
                match[ind[1]] = i
                match[i] = i
                n_ind = 0
                games += 1
            elif n_ind == 3:
                if lifo:
                    match[ind[1]] = i
                    match[ind[2]] = i
                else:
                    match[ind[0]] = i
                    match[ind[1]] = i
                    ind[0] = ind[2]
                match[i] = i
                n_ind = 1
                games += 1
            else:
                team = i
    return games


@njit(cache=True)
def _packing_kernel(classes, match):
    # a unit is a real team (second == -1) or two packed individuals
    pending = -1
    unit_first = -1
    unit_second = -1
    games = 0
    for i in range(classes.size):
        if classes[i] == 0:
            if pending < 0:
                pending = i
                continue
            first = pending
            second = i
            pending = -1
        else:
            first = i
            second = -1
        if unit_first < 0:
            unit_first = first
            unit_second = second
            continue
        match[unit_first] = i
        if unit_second >= 0:
            match[unit_second] = i
        match[first] = i
        if second >= 0:
            match[second] = i
        unit_first = -1
        unit_second = -1
        games += 1
    return games


@njit(cache=True)
def _two_queue_kernel(classes, match):
    ind = np.empty(4, np.int64)
    n_ind = 0
    team = -1
    games = 0
    for i in range(classes.size):
        if classes[i] == 0:
            ind[n_ind] = i
            n_ind += 1
            if n_ind == 4:
                for j in range(4):
                    match[ind[j]] = i
                n_ind = 0
                games += 1
        elif team < 0:
            team = i
        else:
            match[team] = i
            match[i] = i
            team = -1
            games += 1
    return games


@njit(cache=True)
def _choice_kernel(classes, compatible, match):
    # one FIFO queue per class; an arrival takes the earliest compatible player
    n = classes.size
    queue = np.empty((3, n), np.int64)
    head = np.zeros(3, np.int64)
    tail = np.zeros(3, np.int64)
    games = 0
    for i in range(n):
        c = classes[i]
        best = -1
        best_q = -1
        for j in range(3):
            if compatible[c, j] and head[j] < tail[j]:
                cand = queue[j, head[j]]
                if best < 0 or cand < best:
                    best = cand
                    best_q = j
        if best >= 0:
            head[best_q] += 1
            match[best] = i
            match[i] = i
            games += 1
        else:
            queue[c, tail[c]] = i
            tail[c] += 1
    return games


SIDE_PARTNERS = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.bool_)
ZONE_PARTNERS = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.bool_)

PLAYERS_PER_GAME = {
    Mechanism.CENTRAL: 4,
    Mechanism.TWO_QUEUE: 4,
    Mechanism.SIDE_SELECTION: 2,
    Mechanism.TWO_ZONE: 2,
}


def _match(policy: PolicySpec, rates, classes: np.ndarray) -> tuple[np.ndarray, int]:
    match = np.full(classes.size, -1, dtype=np.int64)
    mech = policy.mechanism
    if mech is Mechanism.KPLAYER:
        games = _kplayer_kernel(classes.size, rates.k, match)
    elif mech is Mechanism.CENTRAL:
        if policy.order is ServiceOrder.PACKING:
            games = _packing_kernel(classes, match)
        else:
            games = _central_kernel(classes, policy.order is ServiceOrder.LIFO, match)
    elif mech is Mechanism.TWO_QUEUE:
        games = _two_queue_kernel(classes, match)
    elif mech is Mechanism.SIDE_SELECTION:
        games = _choice_kernel(classes, SIDE_PARTNERS, match)
    else:
        games = _choice_kernel(classes, ZONE_PARTNERS, match)
    return match, int(games)


# --- replications ----------------------------------------------------------

class ArrivalStream:
    """Merged Poisson arrivals drawn lazily from one generator."""

    def __init__(self, rates, rng: np.random.Generator):
        class_rates = np.asarray(rates.class_rates(), dtype=float)
        self.total = float(class_rates.sum())
        if not self.total > 0:
            raise DomainError("total arrival rate must be positive")
        self.cum = np.cumsum(class_rates / self.total)
        self.cum[-1] = 1.0
        self.rng = rng
        self.gaps = np.empty(0)
        self.classes = np.empty(0, dtype=np.int64)

    def extend(self, n: int) -> None:
        gaps = self.rng.exponential(1 / self.total, n)
        classes = np.searchsorted(self.cum, self.rng.random(n), side="right").astype(np.int64)
        self.gaps = np.concatenate([self.gaps, gaps])
        self.classes = np.concatenate([self.classes, classes])

    @property
    def times(self) -> np.ndarray:
        return np.cumsum(self.gaps)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replication])))


@dataclass
class Trace:
    arrival_time: np.ndarray
    cls: np.ndarray
    match_time: np.ndarray
    class_names: tuple[str, ...]

    @property
    def wait(self) -> np.ndarray:
        return self.match_time - self.arrival_time


@dataclass
class ReplicationResult:
    summaries: dict[str, stats.WaitSummary]
    games: int
    players_matched: int
    players_per_game: int
    unmatched: int
    end_time: float
    trace: Optional[Trace] = None


def run_replication(config: ExperimentConfig, replication: int = 0,
                    keep_trace: bool = False) -> ReplicationResult:
    """Simulate one replication, draining until every measured arrival is matched.

    If a run still has waiting measured arrivals after the drain budget (one
    extra horizon of arrivals, as for unstable side-selection rates) their waits
    are censored at the last arrival time and counted in ``unmatched``.
    """
    policy, rates = config.policy, config.rates
    stream = ArrivalStream(rates, replication_rng(config.seed, replication))
    lo, hi = config.warmup, config.warmup + config.arrivals
    drain = max(1_000, config.arrivals // 100)
    drain_budget = max(10_000, config.arrivals)
    stream.extend(hi + drain)
    while True:
        match, games = _match(policy, rates, stream.classes)
        pending = int(np.count_nonzero(match[lo:hi] < 0))
        if pending == 0 or stream.classes.size - hi >= drain_budget:
            break
        extra = min(stream.classes.size - hi, drain_budget - (stream.classes.size - hi))
        stream.extend(max(extra, 1))

    times = stream.times
    classes = stream.classes
    players = np.ones(classes.size, dtype=np.int64)
    if isinstance(rates, Rates2v2):
        players[classes == 1] = 2
    matched = match >= 0
    players_matched = int(players[matched].sum())
    per_game = rates.k if isinstance(rates, KPlayerRates) else PLAYERS_PER_GAME[policy.mechanism]

    end_time = float(times[-1])
    seg = slice(lo, hi)
    match_time = np.where(match[seg] >= 0, times[np.maximum(match[seg], 0)], end_time)
    arrival_time = times[seg]
    waits = match_time - arrival_time
    cls = classes[seg]

    summaries = {}
    overall = stats.WaitSummary("overall")
    for c, name in enumerate(rates.classes):
        s = stats.update_many(stats.WaitSummary(name), waits[cls == c])
        summaries[name] = s
        overall = stats.merge(overall, s)
        if name == "team":
            # both players of a team wait the same time
            overall = stats.merge(overall, s)
    summaries["overall"] = overall

    trace = Trace(arrival_time, cls, match_time, rates.classes) if keep_trace else None
    return ReplicationResult(summaries, games, players_matched, per_game, pending,
                             end_time, trace)


@dataclass
class SimulationResult:
    config: ExperimentConfig
    summaries: dict[str, stats.WaitSummary]
    replications: list[ReplicationResult] = field(repr=False)

    @property
    def stable(self) -> bool:
        return self.config.stable

    @property
    def unmatched(self) -> int:
        return sum(r.unmatched for r in self.replications)

    @property
    def converged(self) -> bool:
        return self.stable and self.unmatched == 0

    @property
    def trace(self) -> Optional[Trace]:
        return self.replications[0].trace

    def replication_values(self, label: str, attr: str = "mean") -> list[float]:
        return [getattr(r.summaries[label], attr) for r in self.replications]


def _replication_job(args):
    config, rep, keep_trace = args
    return run_replication(config, rep, keep_trace)


def simulate(config: ExperimentConfig, trace: bool = False, jobs: int = 1) -> SimulationResult:
    """Run every replication and pool the per-class summaries."""
    tasks = [(config, rep, trace and rep == 0) for rep in range(config.replications)]
    if jobs > 1 and config.replications > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reps = list(pool.map(_replication_job, tasks))
    else:
        reps = [_replication_job(t) for t in tasks]
    labels = list(reps[0].summaries)
    summaries = {
        label: stats.finalize([r.summaries[label] for r in reps]) for label in labels
    }
    return SimulationResult(config, summaries, reps)


def write_trace(path, tr: Trace) -> None:
    """Write a trace as comma-separated records with nine fractional digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("arrivalTime,class,matchTime,wait\n")
        for a, c, m, w in zip(tr.arrival_time, tr.cls, tr.match_time, tr.wait):
            fh.write(f"{a:.9f},{tr.class_names[c]},{m:.9f},{w:.9f}\n")


# --- packed arrivals ---------------------------------------------------------

def packed_interarrival_samples(r: Rates2v2, n: int, seed: int = 0) -> np.ndarray:
    """Gaps between packed units: team arrivals and every completed individual pair."""
    if n < 1:
        raise DomainError("need at least one sample")
    stream = ArrivalStream(r, replication_rng(seed, 0))
    unit_rate = r.lambda2 + r.lambda1 / 2
    per_event = unit_rate / (r.lambda1 + r.lambda2)
    chunk = int(math.ceil((n + 1) / per_event * 1.05)) + 100
    while True:
        stream.extend(chunk)
        cls = stream.classes
        individual = cls == 0
        second_of_pair = individual & (np.cumsum(individual) % 2 == 0)
        units = stream.times[(cls == 1) | second_of_pair]
        if units.size >= n + 1:
            return np.diff(units[: n + 1])
        chunk = max(chunk // 2, 100)
