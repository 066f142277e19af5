"""Figure data as tidy rows: axis columns, series, provenance, value, flag.

All grids use a unit total arrival rate.  Only the packed inter-arrival
histogram draws random numbers (and takes a seed).
"""
from __future__ import annotations

import csv
import math
from typing import Iterable, Sequence

import numpy as np

from . import analytics, ctmc
from .errors import DomainError, UnstableError
from .rates import CENTRAL_ORDERS, Rates2v2, ServiceOrder, SideRates, ZoneRates
from .sim import packed_interarrival_samples

FIG6_BIN_WIDTH = 0.25
FIG6_RANGE = (0.0, 8.0)


class FigureData:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[dict] = []

    def add(self, **row) -> None:
        self.rows.append(row)

    def write_csv(self, fh) -> None:
        writer = csv.DictWriter(fh, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _cell(row.get(k)) for k in self.columns})

    def where(self, **match) -> list[dict]:
        return [r for r in self.rows if all(r.get(k) == v for k, v in match.items())]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def _grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0 or hi < lo:
        raise DomainError("grid needs step > 0 and max >= min")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(n + 1)]


def fig5(step: float = 0.01, x_min: float = 0.0, x_max: float = 1.0,
         oracle: bool = True) -> FigureData:
    """Waiting-time variance against lambda1 / lambda_total, printed and chain-based."""
    fig = FigureData(["lambda1_share", "series", "provenance", "value", "flag"])
    orders = CENTRAL_ORDERS + (ServiceOrder.TWO_QUEUE,)
    for x in _grid(x_min, x_max, step):
        r = Rates2v2.normalized(x)
        for order in orders:
            name = order.value
            try:
                if order is ServiceOrder.TWO_QUEUE:
                    printed = analytics.two_queue_stats(r).variance_printed
                else:
                    printed = analytics.central_variance_printed(r, order)
                fig.add(lambda1_share=x, series=f"{name}_printed", provenance="analytic",
                        value=printed, flag="")
            except DomainError:
                fig.add(lambda1_share=x, series=f"{name}_printed", provenance="analytic",
                        value=None, flag="undefined")
            if not oracle:
                continue
            try:
                value = ctmc.tagged_wait_moments(r, order=order).variance
                flag = ""
            except DomainError:
                value, flag = None, "undefined"
            fig.add(lambda1_share=x, series=f"{name}_oracle", provenance="ctmc",
                    value=value, flag=flag)
    return fig


def fig6(lambda1_values: Iterable[float] = (0.2, 0.5, 0.8), n: int = 100_000,
         seed: int = 0, bin_width: float = FIG6_BIN_WIDTH) -> FigureData:
    """Histogram of packed-unit inter-arrival times next to the matching exponential."""
    fig = FigureData(["lambda1", "bin_left", "bin_right", "bin_width", "series",
                      "provenance", "value", "flag"])
    edges = np.arange(FIG6_RANGE[0], FIG6_RANGE[1] + bin_width / 2, bin_width)
    for l1 in lambda1_values:
        r = Rates2v2.normalized(l1)
        samples = packed_interarrival_samples(r, n, seed)
        counts, _ = np.histogram(samples, bins=edges)
        density = counts / (samples.size * bin_width)
        unit_rate = r.lambda2 + r.lambda1 / 2
        expo = (np.exp(-unit_rate * edges[:-1]) - np.exp(-unit_rate * edges[1:])) / bin_width
        for lo, hi, d, e in zip(edges[:-1], edges[1:], density, expo):
            common = dict(lambda1=l1, bin_left=float(lo), bin_right=float(hi),
                          bin_width=bin_width, flag="")
            fig.add(series="packed", provenance="simulation", value=float(d), **common)
            fig.add(series="poisson", provenance="analytic", value=float(e), **common)
    return fig


def fig8(step: float = 0.01) -> FigureData:
    """Side selection: overall mean wait over (lambdaA, lambdaB), lambdaC = 1 - both."""
    fig = FigureData(["lambdaA", "lambdaB", "lambdaC", "series", "provenance", "value", "flag"])
    for la in _grid(0.0, 1.0, step):
        for lb in _grid(0.0, 1.0, step):
            lc = round(1.0 - la - lb, 12)
            if lc < 0:
                continue
            row = dict(lambdaA=la, lambdaB=lb, lambdaC=lc, series="mean_overall",
                       provenance="analytic")
            try:
                value = analytics.side_selection_stats(SideRates(la, lb, lc)).mean_overall
                fig.add(value=value, flag="", **row)
            except UnstableError:
                fig.add(value=None, flag="unstable", **row)
    return fig


def fig10(step: float = 0.01) -> FigureData:
    """Two zones: improvement factor over (lambdaA, lambdaC), lambdaB = 1 - both."""
    fig = FigureData(["lambdaA", "lambdaB", "lambdaC", "series", "provenance", "value", "flag"])
    for la in _grid(0.0, 1.0, step):
        for lc in _grid(0.0, 1.0, step):
            lb = round(1.0 - la - lc, 12)
            if lb < 0:
                continue
            row = dict(lambdaA=la, lambdaB=lb, lambdaC=lc, series="q", provenance="analytic")
            try:
                fig.add(value=analytics.two_zone_stats(ZoneRates(la, lb, lc)).improvement_factor,
                        flag="", **row)
            except DomainError:
                fig.add(value=None, flag="undefined", **row)
    return fig


def fig11(step: float = 0.01) -> FigureData:
    """Two zones: overall mean wait over (lambdaA, lambdaB), lambdaC = 1 - both."""
    fig = FigureData(["lambdaA", "lambdaB", "lambdaC", "series", "provenance", "value", "flag"])
    for la in _grid(0.0, 1.0, step):
        for lb in _grid(0.0, 1.0, step):
            lc = round(1.0 - la - lb, 12)
            if lc < 0:
                continue
            row = dict(lambdaA=la, lambdaB=lb, lambdaC=lc, series="mean_overall",
                       provenance="analytic")
            try:
                fig.add(value=analytics.two_zone_stats(ZoneRates(la, lb, lc)).mean_overall,
                        flag="", **row)
            except DomainError:
                fig.add(value=None, flag="undefined", **row)
    return fig


FIGURES = {"fig5": fig5, "fig6": fig6, "fig8": fig8, "fig10": fig10, "fig11": fig11}
