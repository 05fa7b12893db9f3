"""Command-line front end emitting the CSV artifacts for the two reproduction figures."""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path
from typing import IO, Sequence

from . import __version__
from .analysis import expected_inactivations, write_mean_sweep_csv
from .degree import resolve_distribution
from .distribution import failure_lower_bound, inactivation_distribution, write_distribution_csv
from .errors import LtinactError
from .sim import (
    AggregateStats,
    ExperimentPlan,
    compare as compare_stats,
    run as run_plan,
    write_sim_csv,
    write_sim_pmf_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise _UsageError(message)


def _parse_eps(text: str) -> tuple[float, ...]:
    """Accept `start:end:step` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise _UsageError(f"--eps range must be start:end:step, got {text!r}")
        start, end, step = (float(p) for p in parts)
        if step <= 0 or end < start:
            raise _UsageError(f"bad --eps range {text!r}")
        count = int(round((end - start) / step)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    return tuple(float(p) for p in text.split(","))


def _parse_m(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _add_common(sub: argparse.ArgumentParser, *, trials: bool = False) -> None:
    sub.add_argument("--k", type=int, required=True, help="number of input symbols")
    sub.add_argument("--m", type=_parse_m, help="output symbol count(s), comma separated")
    sub.add_argument("--eps", type=_parse_eps, help="relative overhead(s): list or start:end:step")
    sub.add_argument("--dist", required=True, help="preset name or distribution file path")
    sub.add_argument("--prune", type=float, default=1e-15, help="state pruning threshold")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--out", default="-", help="output CSV path (default stdout)")
    if trials:
        sub.add_argument("--trials", type=int, default=1000, help="Monte Carlo trials per config")
        sub.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def build_parser() -> _Parser:
    parser = _Parser(prog="ltinact", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ltinact {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_mean = subs.add_parser("analyze-mean", help="expected inactivations per overhead")
    _add_common(p_mean)

    p_dist = subs.add_parser("analyze-dist", help="distribution of the inactivation count")
    _add_common(p_dist)
    p_dist.add_argument("--n-star", type=int, default=None,
                        help="inactivation cap; appends the failure lower bound")

    p_sim = subs.add_parser("simulate", help="Monte Carlo estimate of the inactivation count")
    _add_common(p_sim, trials=True)
    p_sim.add_argument("--mode", choices=["count-only", "full-decode"], default="count-only")
    p_sim.add_argument("--pmf-out", default=None, help="optional CSV path for empirical PMFs")

    p_cmp = subs.add_parser("compare", help="run analysis and simulation, check tolerances")
    _add_common(p_cmp, trials=True)
    p_cmp.add_argument("--mode", choices=["mean", "dist"], default="mean")
    p_cmp.add_argument("--sigma-tol", type=float, default=3.0)
    p_cmp.add_argument("--tv-tol", type=float, default=0.02)
    p_cmp.add_argument("--sim-dist", default=None,
                       help="override the simulation-side distribution (mismatch testing)")
    return parser


def _configs(args) -> list[tuple[float, int]]:
    if (args.m is None) == (args.eps is None):
        raise _UsageError("exactly one of --m / --eps is required")
    if args.m is not None:
        return [(m / args.k - 1.0, m) for m in args.m]
    return [(eps, int(round(args.k * (1.0 + eps)))) for eps in args.eps]


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with Path(path).open("w", newline="") as fh:
            yield fh


def _header(fh: IO[str], args, configs: list[tuple[float, int]], extra: str = "") -> None:
    eps_txt = ",".join(f"{eps:g}" for eps, _ in configs)
    m_txt = ",".join(str(m) for _, m in configs)
    fh.write(
        f"# ltinact {__version__} | {args.command} k={args.k} m={m_txt} eps={eps_txt}"
        f" dist={args.dist} seed={args.seed} prune={args.prune:g}{extra}\n"
    )


def _cmd_analyze_mean(args) -> int:
    dist = resolve_distribution(args.dist)
    configs = _configs(args)
    rows = []
    for eps, m in configs:
        res = expected_inactivations(args.k, m, dist, prune=args.prune)
        rows.append((eps, res.expected))
    with _open_out(args.out) as fh:
        _header(fh, args, configs)
        write_mean_sweep_csv(rows, fh)
    return EXIT_OK


def _cmd_analyze_dist(args) -> int:
    dist = resolve_distribution(args.dist)
    configs = _configs(args)
    if len(configs) != 1:
        raise _UsageError("analyze-dist requires exactly one --m or --eps value")
    eps, m = configs[0]
    res = inactivation_distribution(args.k, m, dist, prune=args.prune)
    with _open_out(args.out) as fh:
        _header(fh, args, configs, extra=f" pruned_mass={res.pruned_mass:.6g}")
        write_distribution_csv(res, fh)
        if args.n_star is not None:
            bound = failure_lower_bound(res.cdf, args.n_star)
            fh.write(f"# n_star={args.n_star} failure_lower_bound={bound!r}\n")
    return EXIT_OK


def _make_plan(args, dist, configs, mode: str) -> ExperimentPlan:
    return ExperimentPlan(
        k=args.k,
        dist=dist,
        trials=args.trials,
        master_seed=args.seed,
        m_values=tuple(m for _, m in configs),
        mode=mode,
    )


def _cmd_simulate(args) -> int:
    dist = resolve_distribution(args.dist)
    configs = _configs(args)
    plan = _make_plan(args, dist, configs, args.mode)
    stats = run_plan(plan, jobs=args.jobs)
    with _open_out(args.out) as fh:
        _header(fh, args, configs, extra=f" trials={args.trials} mode={args.mode}")
        write_sim_csv(stats, fh)
    if args.pmf_out:
        with _open_out(args.pmf_out) as fh:
            _header(fh, args, configs, extra=f" trials={args.trials} mode={args.mode}")
            write_sim_pmf_csv(stats, fh)
    return EXIT_OK


def _cmd_compare(args) -> int:
    dist = resolve_distribution(args.dist)
    sim_dist = resolve_distribution(args.sim_dist) if args.sim_dist else dist
    configs = _configs(args)
    if args.mode == "dist" and len(configs) != 1:
        raise _UsageError("compare --mode dist requires exactly one config")
    if args.mode == "mean":
        analytic = [
            expected_inactivations(args.k, m, dist, prune=args.prune) for _, m in configs
        ]
    else:
        analytic = [
            inactivation_distribution(args.k, m, dist, prune=args.prune) for _, m in configs
        ]
    plan = _make_plan(args, sim_dist, configs, "count-only")
    stats = run_plan(plan, jobs=args.jobs)
    report = compare_stats(stats, analytic, sigma_tol=args.sigma_tol, tv_tol=args.tv_tol)
    with _open_out(args.out) as fh:
        _header(fh, args, configs, extra=f" trials={args.trials} mode={args.mode}")
        fh.write("epsilon,m,analytic,empirical,stderr,z,tv,passed\n")
        for row in report.rows:
            tv = "" if row.tv_distance is None else repr(row.tv_distance)
            fh.write(
                f"{row.epsilon:g},{row.m},{row.analytic_mean!r},{row.empirical_mean!r},"
                f"{row.stderr!r},{row.z!r},{tv},{row.passed}\n"
            )
        fh.write(f"# overall: {'PASS' if report.passed else 'FAIL'}\n")
    return EXIT_OK if report.passed else EXIT_TOLERANCE


_COMMANDS = {
    "analyze-mean": _cmd_analyze_mean,
    "analyze-dist": _cmd_analyze_dist,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"ltinact: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"ltinact: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"ltinact: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LtinactError as exc:
        print(f"ltinact: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
