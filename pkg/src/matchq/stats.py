"""Streaming waiting-time summaries.

Summaries are immutable values; ``update``/``merge`` return new ones.  Merging
uses the pairwise update of Chan et al., so combining per-chunk or
per-replication summaries is exact for counts and means and stable for the
second moment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

Z99 = 2.576


@dataclass(frozen=True)
class WaitSummary:
    """Count, mean and sum of squared deviations (``m2``) of a set of waits.

    ``replications``/``ci_half_width``/``std_error`` are only filled in by
    :func:`finalize`; they describe the spread of replication means.
    """

    label: str = ""
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    replications: int = 0
    std_error: float = math.nan
    ci_half_width: float = math.nan

    @property
    def variance(self) -> float:
        """Unbiased sample variance (0 with fewer than two samples)."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "replications": self.replications,
            "stdError": _json_float(self.std_error),
            "ciHalfWidth99": _json_float(self.ci_half_width),
        }


def _json_float(x: float) -> float | None:
    return None if math.isnan(x) else x


def update(s: WaitSummary, x: float) -> WaitSummary:
    """Welford single-sample update."""
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"waiting times must be finite and >= 0, got {x!r}")
    n = s.count + 1
    delta = x - s.mean
    mean = s.mean + delta / n
    return replace(s, count=n, mean=mean, m2=s.m2 + delta * (x - mean))


def update_many(s: WaitSummary, xs: Iterable[float] | np.ndarray) -> WaitSummary:
    """Fold a batch of samples in: two-pass moments of the batch, then a merge."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return s
    if not np.all(np.isfinite(xs)) or np.any(xs < 0):
        raise DomainError("waiting times must be finite and >= 0")
    mean = float(xs.mean())
    batch = WaitSummary(s.label, int(xs.size), mean, float(np.sum((xs - mean) ** 2)))
    return merge(s, batch)


def merge(a: WaitSummary, b: WaitSummary) -> WaitSummary:
    if b.count == 0:
        return replace(a, replications=0, std_error=math.nan, ci_half_width=math.nan)
    if a.count == 0:
        return replace(b, label=a.label or b.label, replications=0,
                       std_error=math.nan, ci_half_width=math.nan)
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    return WaitSummary(a.label or b.label, n, mean, m2)


def finalize(reps: Sequence[WaitSummary], z: float = Z99) -> WaitSummary:
    """Pool replication summaries and attach a batch-means confidence interval.

    The interval uses only the replication means, which are independent, so
    the correlation between waits inside one run does not bias it.
    """
    pooled = WaitSummary(reps[0].label if reps else "")
    for r in reps:
        pooled = merge(pooled, r)
    means = np.array([r.mean for r in reps if r.count > 0])
    if means.size < 2:
        return replace(pooled, replications=len(reps))
    se = float(np.std(means, ddof=1) / math.sqrt(means.size))
    return replace(pooled, replications=len(reps), std_error=se, ci_half_width=z * se)


def replication_spread(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error of per-replication estimates."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), math.nan
    return float(v.mean()), float(np.std(v, ddof=1) / math.sqrt(v.size))
