"""Command-line entry point: ``matchq``.

Single results go to stdout as JSON documents; grids go to CSV files.

Exit codes: 0 success, 1 usage error, 2 unstable rates, 3 degenerate model,
4 numerical or truncation failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import analytics, ctmc, figures
from .errors import (
    DegenerateModelError,
    DomainError,
    NumericalError,
    UnstableError,
)
from .rates import KPlayerRates, Rates2v2, ServiceOrder, SideRates, ZoneRates
from .sim import (
    DEFAULT_WARMUP,
    ExperimentConfig,
    Mechanism,
    PolicySpec,
    simulate,
    write_trace,
)

SCHEMA_VERSION = 1
EXIT_USAGE, EXIT_UNSTABLE, EXIT_DEGENERATE, EXIT_NUMERICAL = 1, 2, 3, 4
MODELS = ("kplayer", "central", "twoqueue", "sides", "zones")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_rate_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("rates")
    g.add_argument("--k", type=int, default=4, help="players per game (kplayer)")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0, help="arrival rate (kplayer)")
    g.add_argument("--l1", type=float, help="individual arrival rate (central, twoqueue)")
    g.add_argument("--l2", type=float, help="team arrival rate (central, twoqueue)")
    g.add_argument("--la", type=float, help="class A rate (sides, zones)")
    g.add_argument("--lb", type=float, help="class B rate (sides, zones)")
    g.add_argument("--lc", type=float, help="choice-free rate (sides, zones)")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.model} needs " + ", ".join(f"--{n}" for n in missing))
    return [getattr(args, n) for n in names]


def _rates(args):
    if args.model == "kplayer":
        return KPlayerRates(args.k, args.lam)
    if args.model in ("central", "twoqueue"):
        return Rates2v2(*_require(args, "l1", "l2"))
    cls = SideRates if args.model == "sides" else ZoneRates
    return cls(*_require(args, "la", "lb", "lc"))


def _doc(name: str, argv: Sequence[str], config: dict, provenance: str, results: dict) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "command": {"name": name, "argv": list(argv), "config": config},
        "provenance": provenance,
        "results": results,
    }


def _choice_doc(s: analytics.ChoiceStats) -> dict:
    return {
        "pi0": s.pi0,
        "meanA": s.mean_a,
        "meanB": s.mean_b,
        "meanC": s.mean_c,
        "meanOverall": s.mean_overall,
        "q": s.improvement_factor,
    }


def cmd_analytic(args) -> dict:
    m = args.model
    if m == "min-variance":
        return {"ratio": analytics.two_queue_min_variance_ratio()}
    if m == "sides-slope":
        return {"dqdLambdaB": analytics.side_selection_q_derivative(*_require(args, "lb"))}
    rates = _rates(args)
    if m == "kplayer":
        return {"meanWait": analytics.k_player_mean_wait(rates.k, rates.lam)}
    if m == "central":
        return {
            "meanWait": analytics.central_2v2_mean_wait(rates),
            "variancePrinted": {
                o: analytics.central_variance_printed(rates, o) for o in ("fifo", "packing", "lifo")
            },
        }
    if m == "twoqueue":
        s = analytics.two_queue_stats(rates)
        return {
            "meanIndividual": s.mean_individual,
            "meanTeam": s.mean_team,
            "meanOverall": s.mean_overall,
            "variancePrinted": s.variance_printed,
        }
    if m == "sides":
        return _choice_doc(analytics.side_selection_stats(rates))
    return _choice_doc(analytics.two_zone_stats(rates))


def cmd_oracle(args) -> dict:
    rates = _rates(args)
    order = ServiceOrder.TWO_QUEUE if args.model == "twoqueue" else ServiceOrder.parse(args.order)
    truncation = None
    results: dict = {}
    if isinstance(rates, SideRates):
        if not rates.stable:
            raise UnstableError(
                "side-selection chain is not positive recurrent: "
                "need lambdaC > |lambdaA - lambdaB|"
            )
        waits = ctmc.converged_side_waits(rates, tol=args.tol, max_truncation=args.max_truncation)
        truncation = waits.truncation
        results["truncation"] = truncation
        results["boundaryMass"] = waits.boundary_mass
    m = ctmc.tagged_wait_moments(rates, order=order, truncation=truncation)
    results["classes"] = {
        c: {"mean": v.mean, "secondMoment": v.second_moment, "variance": v.variance}
        for c, v in m.per_class.items()
    }
    results["overall"] = {"mean": m.mean, "secondMoment": m.second_moment, "variance": m.variance}
    return results


def _experiment(args) -> ExperimentConfig:
    mechanism = Mechanism(args.model)
    return ExperimentConfig(
        PolicySpec(mechanism, args.order),
        _rates(args),
        arrivals=args.arrivals,
        warmup=args.warmup,
        seed=args.seed,
        replications=args.reps,
    )


def cmd_simulate(args) -> tuple[dict, dict]:
    config = _experiment(args)
    result = simulate(config, trace=args.trace is not None, jobs=args.jobs)
    if args.trace is not None:
        write_trace(args.trace, result.trace)
    results = {
        "stable": result.stable,
        "converged": result.converged,
        "unmatchedCensored": result.unmatched,
        "games": sum(r.games for r in result.replications),
        "classes": {k: v.as_dict() for k, v in result.summaries.items()},
    }
    return config.as_dict(), results


def cmd_figure(args) -> dict:
    if args.id == "fig5":
        fig = figures.fig5(step=args.step, x_min=args.x_min, x_max=args.x_max,
                           oracle=not args.printed_only)
    elif args.id == "fig6":
        fig = figures.fig6(args.lambda1, n=args.n, seed=args.seed)
    else:
        fig = figures.FIGURES[args.id](step=args.step)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fig.write_csv(fh)
    return {"out": args.out, "rows": len(fig.rows), "columns": fig.columns}


def cmd_audit(args) -> dict:
    rows = ctmc.audit_variance(ctmc.default_audit_grid())
    if args.out:
        fig = figures.FigureData(list(rows[0].as_dict()))
        for r in rows:
            fig.add(**r.as_dict())
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fig.write_csv(fh)
    lines = [f"{'l1':>5} {'l2':>5} {'order':>9} {'printed':>10} {'oracle':>10} {'rel.gap':>8}  flag"]
    for r in rows:
        printed = "-" if r.printed is None else f"{r.printed:10.4f}"
        rel = "-" if r.rel_gap is None else f"{r.rel_gap:8.3f}"
        flag = "litmus" if r.litmus else ""
        lines.append(f"{r.lambda1:5.2f} {r.lambda2:5.2f} {r.order.value:>9} {printed:>10} "
                     f"{r.oracle_variance:10.4f} {rel:>8}  {flag}")
    print("\n".join(lines), file=sys.stderr)
    return {"rows": [r.as_dict() for r in rows]}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matchq", description="Matchmaking queue analysis and simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analytic", help="closed-form results")
    p.add_argument("model", choices=MODELS + ("sides-slope", "min-variance"))
    _add_rate_flags(p)

    p = sub.add_parser("oracle", help="tagged-customer chain moments")
    p.add_argument("model", choices=MODELS)
    _add_rate_flags(p)
    p.add_argument("--order", default="fifo", choices=["fifo", "packing", "lifo"])
    p.add_argument("--tol", type=float, default=1e-10, help="boundary mass tolerance (sides)")
    p.add_argument("--max-truncation", type=int, default=400)

    p = sub.add_parser("simulate", help="discrete-event simulation")
    p.add_argument("model", choices=MODELS)
    _add_rate_flags(p)
    p.add_argument("--order", default="fifo", choices=["fifo", "packing", "lifo"])
    p.add_argument("--arrivals", type=int, default=100_000)
    p.add_argument("--warmup", type=int, default=DEFAULT_WARMUP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=8)
    p.add_argument("--jobs", type=int, default=int(os.environ.get("MATCHQ_JOBS", "1")))
    p.add_argument("--trace", metavar="PATH")

    p = sub.add_parser("figure", help="emit figure data as CSV")
    p.add_argument("id", choices=sorted(figures.FIGURES))
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--printed-only", action="store_true", help="fig5: skip the oracle series")
    p.add_argument("--lambda1", type=float, nargs="+", default=[0.2, 0.5, 0.8])
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("audit", help="printed vs. chain-based variance table")
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("rerun", help="re-execute the command echoed in a JSON output")
    p.add_argument("doc", metavar="JSON")
    return parser


def run(argv: Sequence[str]) -> dict:
    args = build_parser().parse_args(argv)
    if args.command == "rerun":
        with open(args.doc, encoding="utf-8") as fh:
            echoed = json.load(fh)["command"]["argv"]
        return run(echoed)
    if args.command == "analytic":
        return _doc("analytic", argv, vars_config(args), "analytic", cmd_analytic(args))
    if args.command == "oracle":
        return _doc("oracle", argv, vars_config(args), "ctmc", cmd_oracle(args))
    if args.command == "simulate":
        config, results = cmd_simulate(args)
        config["jobs"] = args.jobs
        config["trace"] = args.trace
        return _doc("simulate", argv, config, "simulation", results)
    if args.command == "figure":
        prov = {"fig5": "analytic+ctmc", "fig6": "simulation+analytic"}.get(args.id, "analytic")
        return _doc("figure", argv, vars_config(args), prov, cmd_figure(args))
    return _doc("audit", argv, vars_config(args), "analytic+ctmc", cmd_audit(args))


def vars_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        doc = run(argv)
    except UsageError as exc:
        print(f"matchq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnstableError as exc:
        print(f"matchq: unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except DegenerateModelError as exc:
        print(f"matchq: degenerate model: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DomainError as exc:
        print(f"matchq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"matchq: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    json.dump(doc, sys.stdout, indent=2, allow_nan=False)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
