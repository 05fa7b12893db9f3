"""Seeded, reproducible Monte Carlo experiments over encoding plus triangularization.

Each trial derives its own stream from (master seed, config index, trial
index), so results are bit-identical across runs and across worker counts.
Aggregation carries integer counts and sums, never floats, which makes the
merge order-insensitive.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .decoder import decode, triangularize
from .degree import DegreeDistribution, validate
from .errors import ConfigMismatch, DegreeExceedsK
from .graph import encode

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    _HAVE_NUMBA = False


def _count_trial(k, m, support, cum, rng, record, r_out, c_out, flag_out):
    """Encode one LT instance and run the counting-only triangularization.

    Consumes randomness in the same order as encode() + triangularize(): one
    uniform float per output degree, one bounded integer per shuffle swap, one
    bounded integer per decoding step.  Returns the number of inactivations.
    """
    n_support = support.shape[0]
    d_cap = support[n_support - 1]
    deg = np.empty(m, np.int64)
    off = np.empty(m + 1, np.int64)
    off[0] = 0
    flat = np.empty(m * d_cap, np.int64)
    pool = np.arange(k)
    for i in range(m):
        x = rng.random()
        idx = 0
        while idx < n_support - 1 and x >= cum[idx]:
            idx += 1
        d = support[idx]
        for j in range(d):
            t = rng.integers(j, k)
            tmp = pool[j]
            pool[j] = pool[t]
            pool[t] = tmp
        base = off[i]
        for j in range(d):
            flat[base + j] = pool[j]
        deg[i] = d
        off[i + 1] = base + d

    nnz = off[m]
    in_off = np.zeros(k + 1, np.int64)
    for e in range(nnz):
        in_off[flat[e] + 1] += 1
    for v in range(k):
        in_off[v + 1] += in_off[v]
    in_flat = np.empty(nnz, np.int64)
    cursor = in_off[:k].copy()
    for i in range(m):
        for e in range(off[i], off[i + 1]):
            v = flat[e]
            in_flat[cursor[v]] = i
            cursor[v] += 1

    red = deg.copy()
    rip_members = np.empty(m, np.int64)
    rip_pos = np.full(m, -1, np.int64)
    rip_len = 0
    cloud_count = 0
    for i in range(m):
        if red[i] == 1:
            rip_pos[i] = rip_len
            rip_members[rip_len] = i
            rip_len += 1
        elif red[i] >= 2:
            cloud_count += 1
    act_members = np.arange(k)
    act_pos = np.arange(k)
    act_len = k

    n_inact = 0
    step_idx = 0
    for u in range(k, 0, -1):
        if record:
            r_out[step_idx] = rip_len
            c_out[step_idx] = cloud_count
        if rip_len > 0:
            row = rip_members[rng.integers(0, rip_len)]
            v = -1
            for e in range(off[row], off[row + 1]):
                w = flat[e]
                if act_pos[w] >= 0:
                    v = w
                    break
            if record:
                flag_out[step_idx] = 0
        else:
            v = act_members[rng.integers(0, act_len)]
            n_inact += 1
            if record:
                flag_out[step_idx] = 1
        step_idx += 1

        pv = act_pos[v]
        last = act_members[act_len - 1]
        act_members[pv] = last
        act_pos[last] = pv
        act_pos[v] = -1
        act_len -= 1

        for e in range(in_off[v], in_off[v + 1]):
            row = in_flat[e]
            rd = red[row]
            if rd == 0:
                continue
            rd -= 1
            red[row] = rd
            if rd == 1:
                cloud_count -= 1
                rip_pos[row] = rip_len
                rip_members[rip_len] = row
                rip_len += 1
            elif rd == 0:
                pr = rip_pos[row]
                lastr = rip_members[rip_len - 1]
                rip_members[pr] = lastr
                rip_pos[lastr] = pr
                rip_pos[row] = -1
                rip_len -= 1
    return n_inact


count_trial_python = _count_trial
count_trial_jit = njit(cache=True)(_count_trial) if _HAVE_NUMBA else None


def trial_stream(master_seed: int, config_index: int, trial: int) -> np.random.Generator:
    """Counter-based per-trial stream; worker assignment cannot affect it."""
    return np.random.default_rng([master_seed, config_index, trial])


def epsilon_to_m(k: int, eps: float) -> int:
    """m = round(k (1 + eps)) with Python's ties-to-even rounding."""
    return int(round(k * (1.0 + eps)))


@dataclass(frozen=True)
class ExperimentPlan:
    """One simulation campaign: a config grid, trial count, seed, and mode."""

    k: int
    dist: DegreeDistribution
    trials: int
    master_seed: int
    eps_values: tuple[float, ...] | None = None
    m_values: tuple[int, ...] | None = None
    mode: str = "count-only"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if (self.eps_values is None) == (self.m_values is None):
            raise ValueError("exactly one of eps_values / m_values must be given")
        if self.eps_values is not None and list(self.eps_values) != sorted(
            set(self.eps_values)
        ):
            raise ValueError("eps grid must be strictly increasing")
        if self.mode not in ("count-only", "full-decode"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.dist.d_max > self.k:
            raise DegreeExceedsK(f"d_max {self.dist.d_max} > k {self.k}")

    @property
    def configs(self) -> list[tuple[float, int]]:
        if self.m_values is not None:
            return [(m / self.k - 1.0, m) for m in self.m_values]
        return [(eps, epsilon_to_m(self.k, eps)) for eps in self.eps_values]


@dataclass
class ConfigResult:
    """Counts-based statistics for one (k, m) config."""

    k: int
    m: int
    epsilon: float
    trials: int
    counts: dict[int, int]
    success_count: int | None = None

    @property
    def sum_n(self) -> int:
        return sum(n * c for n, c in self.counts.items())

    @property
    def sum_n_sq(self) -> int:
        return sum(n * n * c for n, c in self.counts.items())

    @property
    def mean(self) -> float:
        return self.sum_n / self.trials

    @property
    def stderr(self) -> float:
        """Standard error of the mean from the unbiased sample variance."""
        if self.trials < 2:
            return 0.0
        var = (self.sum_n_sq - self.sum_n**2 / self.trials) / (self.trials - 1)
        return math.sqrt(max(var, 0.0) / self.trials)

    @property
    def pmf(self) -> dict[int, float]:
        return {n: c / self.trials for n, c in sorted(self.counts.items())}

    @property
    def success_rate(self) -> float | None:
        if self.success_count is None:
            return None
        return self.success_count / self.trials


@dataclass
class AggregateStats:
    """Results for every config of a plan, in plan order."""

    plan: ExperimentPlan
    results: list[ConfigResult]


def merge_counts(parts: Sequence[tuple[dict[int, int], int | None]]) -> tuple[dict[int, int], int | None]:
    """Combine partial histograms; pure integer addition, order-insensitive."""
    counts: dict[int, int] = {}
    successes: int | None = None
    for part_counts, part_succ in parts:
        for n, c in part_counts.items():
            counts[n] = counts.get(n, 0) + c
        if part_succ is not None:
            successes = (successes or 0) + part_succ
    return counts, successes


def _run_chunk(args) -> tuple[dict[int, int], int | None]:
    (k, m, probs, master_seed, cfg_idx, t0, t1, mode, engine) = args
    dist = validate(probs.items(), name="chunk")
    counts: dict[int, int] = {}
    successes: int | None = 0 if mode == "full-decode" else None
    if mode == "count-only":
        kernel = count_trial_python if engine == "python" else count_trial_jit
        if kernel is None:
            kernel = count_trial_python
        support = dist.degrees.astype(np.int64)
        cum = dist.cumulative.astype(np.float64)
        dummy = np.empty(0, np.int64)
        for t in range(t0, t1):
            rng = trial_stream(master_seed, cfg_idx, t)
            n = int(kernel(k, m, support, cum, rng, False, dummy, dummy, dummy))
            counts[n] = counts.get(n, 0) + 1
    else:
        for t in range(t0, t1):
            rng = trial_stream(master_seed, cfg_idx, t)
            g = encode(k, m, dist, rng)
            _, report = decode(g, None, rng)
            n = report.n_inactivations
            counts[n] = counts.get(n, 0) + 1
            if report.success:
                successes += 1
    return counts, successes


def run(plan: ExperimentPlan, jobs: int = 1, engine: str = "auto") -> AggregateStats:
    """Execute the plan; identical output for any jobs value.

    engine selects the counting kernel: "auto" prefers the jitted one,
    "python" forces the uncompiled twin (used for cross-validation).
    """
    if engine not in ("auto", "jit", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    results = []
    for cfg_idx, (eps, m) in enumerate(plan.configs):
        chunks = _split(plan.trials, max(1, jobs))
        args = [
            (plan.k, m, plan.dist.probs, plan.master_seed, cfg_idx, t0, t1, plan.mode, engine)
            for t0, t1 in chunks
        ]
        if jobs <= 1 or len(args) == 1:
            parts = [_run_chunk(a) for a in args]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                parts = list(pool.map(_run_chunk, args))
        counts, successes = merge_counts(parts)
        results.append(
            ConfigResult(
                k=plan.k,
                m=m,
                epsilon=eps,
                trials=plan.trials,
                counts=counts,
                success_count=successes,
            )
        )
    return AggregateStats(plan=plan, results=results)


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    size = -(-total // parts)
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


@dataclass
class ComparisonRow:
    epsilon: float
    m: int
    analytic_mean: float
    empirical_mean: float
    stderr: float
    z: float
    tv_distance: float | None
    passed: bool


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    sigma_tol: float
    tv_tol: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def compare(
    stats: AggregateStats,
    analytic: Sequence,
    sigma_tol: float = 3.0,
    tv_tol: float = 0.02,
) -> ComparisonReport:
    """Check simulation against analysis: z-scores for means, TV distance for PMFs.

    analytic entries are MeanResult or DistResult objects aligned with the
    plan's configs; mismatched (k, m) or distribution identity raises
    ConfigMismatch.
    """
    if len(analytic) != len(stats.results):
        raise ConfigMismatch(
            f"{len(stats.results)} simulated configs vs {len(analytic)} analytic results"
        )
    rows = []
    for res, ana in zip(stats.results, analytic):
        if (ana.k, ana.m) != (res.k, res.m):
            raise ConfigMismatch(
                f"simulated (k={res.k}, m={res.m}) vs analytic (k={ana.k}, m={ana.m})"
            )
        if ana.dist_name != stats.plan.dist.name:
            raise ConfigMismatch(
                f"simulated dist {stats.plan.dist.name!r} vs analytic {ana.dist_name!r}"
            )
        if hasattr(ana, "pmf"):
            analytic_mean = ana.expected
            tv = _tv_distance(res, ana.pmf)
        else:
            analytic_mean = ana.expected
            tv = None
        diff = abs(analytic_mean - res.mean)
        if res.stderr > 0:
            z = diff / res.stderr
        else:
            z = 0.0 if diff == 0.0 else math.inf
        ok = z <= sigma_tol and (tv is None or tv <= tv_tol)
        rows.append(
            ComparisonRow(
                epsilon=res.epsilon,
                m=res.m,
                analytic_mean=analytic_mean,
                empirical_mean=res.mean,
                stderr=res.stderr,
                z=z,
                tv_distance=tv,
                passed=ok,
            )
        )
    return ComparisonReport(rows=rows, sigma_tol=sigma_tol, tv_tol=tv_tol)


def _tv_distance(res: ConfigResult, pmf: np.ndarray) -> float:
    empirical = np.zeros(max(pmf.size, max(res.counts) + 1))
    for n, c in res.counts.items():
        empirical[n] = c / res.trials
    padded = np.zeros_like(empirical)
    padded[: pmf.size] = pmf
    return float(0.5 * np.abs(empirical - padded).sum())


def write_sim_csv(stats: AggregateStats, fh: IO[str]) -> None:
    """Per-config stats: epsilon,mean_N,stderr,trials (+success_rate in full-decode mode)."""
    writer = csv.writer(fh)
    header = ["epsilon", "mean_N", "stderr", "trials"]
    full = stats.plan.mode == "full-decode"
    if full:
        header.append("success_rate")
    writer.writerow(header)
    for res in stats.results:
        row = [f"{res.epsilon:g}", repr(res.mean), repr(res.stderr), res.trials]
        if full:
            row.append(repr(res.success_rate))
        writer.writerow(row)


def write_sim_pmf_csv(stats: AggregateStats, fh: IO[str]) -> None:
    """Empirical PMFs: epsilon,n,freq."""
    writer = csv.writer(fh)
    writer.writerow(["epsilon", "n", "freq"])
    for res in stats.results:
        for n, freq in res.pmf.items():
            writer.writerow([f"{res.epsilon:g}", n, repr(freq)])
