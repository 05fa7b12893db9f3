"""First-order decoder-state recursion: joint (cloud, ripple) PMF and expected inactivations.

The decoder is modelled as a finite state machine over u = number of active
inputs.  One step maps the joint PMF of (cloud size, ripple size) at u to the
PMF at u-1; the expected number of inactivations is the summed probability of
an empty ripple over u = k..1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

import numpy as np
from scipy.special import gammaln

from .degree import DegreeDistribution
from .errors import DegreeExceedsK

DEFAULT_PRUNE = 1e-15

# Width of the retained binomial window for cloud departures, in standard
# deviations.  Mass outside is accounted to pruned_mass, never dropped silently.
_B_WINDOW_SIGMAS = 14.0


def logfact_table(n: int) -> np.ndarray:
    """table[i] = ln(i!) for i = 0..n, computed via gammaln (no cumulative drift)."""
    return gammaln(np.arange(n + 1, dtype=np.float64) + 1.0)


def _log_binom(table: np.ndarray, n, j):
    """Elementwise ln C(n, j); -inf outside 0 <= j <= n."""
    n = np.asarray(n, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    valid = (j >= 0) & (j <= n) & (n >= 0)
    safe_n = np.where(valid, n, 0)
    safe_j = np.where(valid, j, 0)
    out = table[safe_n] - table[safe_j] - table[safe_n - safe_j]
    return np.where(valid, out, -np.inf)


def joint_cloud_to_ripple(d: int, u: int, k: int, table: np.ndarray | None = None) -> float:
    """Probability that a degree-d output is in the cloud at u and in the ripple at u-1.

    Zero for d < 2 (such symbols are never in the cloud) and whenever the
    remaining d-2 edges cannot fit among the k-u removed inputs.
    """
    if d > k:
        raise DegreeExceedsK(f"degree {d} > k {k}")
    if d < 2 or u < 2:
        return 0.0
    if d - 2 > k - u:
        return 0.0
    if table is None:
        table = logfact_table(k)
    ratio = math.exp(float(_log_binom(table, k - u, d - 2) - _log_binom(table, k - 2, d - 2)))
    return (d / k) * (d - 1) * ((u - 1) / (k - 1)) * ratio


def cloud_membership_prob(u: int, k: int, dist: DegreeDistribution,
                          table: np.ndarray | None = None) -> float:
    """Probability that a random output symbol is in the cloud with u inputs active.

    One minus the probability of reduced degree 1 (ripple) or 0 (departed).
    """
    if table is None:
        table = logfact_table(k)
    acc = 0.0
    for d, w in dist.probs.items():
        if d > k:
            raise DegreeExceedsK(f"degree {d} > k {k}")
        log_ckd = _log_binom(table, k, d)
        ripple_term = u * math.exp(float(_log_binom(table, k - u, d - 1) - log_ckd))
        gone_term = math.exp(float(_log_binom(table, k - u, d) - log_ckd))
        acc += w * (ripple_term + gone_term)
    val = 1.0 - acc
    if -1e-14 < val < 0.0:
        val = 0.0
    return val


def compute_pu(u: int, k: int, dist: DegreeDistribution,
               table: np.ndarray | None = None) -> float:
    """Probability that a cloud symbol at step u enters the ripple at step u-1.

    Defined as 0 when the cloud itself has probability 0 (states with a
    nonempty cloud are then unreachable and the kernel degenerates anyway).
    """
    if table is None:
        table = logfact_table(k)
    den = cloud_membership_prob(u, k, dist, table)
    if den <= 0.0:
        return 0.0
    num = sum(w * joint_cloud_to_ripple(d, u, k, table) for d, w in dist.probs.items())
    return min(max(num / den, 0.0), 1.0)


def ripple_departure_pmf(r_u: int, u: int) -> dict[int, float]:
    """PMF of the number of ripple symbols leaving during the transition at u.

    The chosen symbol always leaves; each of the other r_u - 1 leaves
    independently with probability 1/u.  For an empty ripple nothing leaves.
    """
    if r_u == 0:
        return {0: 1.0}
    if u == 1:
        return {r_u: 1.0}
    out: dict[int, float] = {}
    for a in range(1, r_u + 1):
        out[a] = (
            math.comb(r_u - 1, a - 1) * (1.0 / u) ** (a - 1) * (1.0 - 1.0 / u) ** (r_u - a)
        )
    return out


@dataclass
class TransitionKernelRow:
    """Per-step kernel data: cloud-to-ripple probability and the shared log-factorial table."""

    u: int
    p_u: float
    logfact: np.ndarray = field(repr=False)


def make_kernel(u: int, k: int, dist: DegreeDistribution,
                table: np.ndarray | None = None) -> TransitionKernelRow:
    if table is None:
        table = logfact_table(k)
    return TransitionKernelRow(u=u, p_u=compute_pu(u, k, dist, table), logfact=table)


@dataclass
class StatePmf2:
    """Sparse joint PMF of (cloud size, ripple size) at a given u.

    table[i, j] = Pr{C_u = c_lo + i, R_u = j}.  pruned_mass accumulates all
    probability discarded by thresholding so far.
    """

    u: int
    c_lo: int
    table: np.ndarray
    pruned_mass: float = 0.0

    @property
    def mass(self) -> dict[tuple[int, int], float]:
        out = {}
        for i, j in zip(*np.nonzero(self.table)):
            out[(self.c_lo + int(i), int(j))] = float(self.table[i, j])
        return out

    def get(self, c: int, r: int) -> float:
        i = c - self.c_lo
        if 0 <= i < self.table.shape[0] and 0 <= r < self.table.shape[1]:
            return float(self.table[i, r])
        return 0.0

    def total(self) -> float:
        return float(self.table.sum())

    def prob_ripple_empty(self) -> float:
        return float(self.table[:, 0].sum())


def _trim2(table: np.ndarray, c_lo: int) -> tuple[np.ndarray, int]:
    rows = np.nonzero(table.any(axis=1))[0]
    cols = np.nonzero(table.any(axis=0))[0]
    if rows.size == 0:
        return np.zeros((1, 1)), c_lo
    return (
        table[rows[0] : rows[-1] + 1, : cols[-1] + 1].copy(),
        c_lo + int(rows[0]),
    )


def ripple_weight_matrix(r_max: int, u: int, table: np.ndarray) -> np.ndarray:
    """W[r, a] = Pr{A_u = a | R_u = r} for 1 <= a <= r <= r_max; other cells 0."""
    W = np.zeros((r_max + 1, r_max + 1))
    if r_max == 0:
        return W
    if u == 1:
        W[np.arange(1, r_max + 1), np.arange(1, r_max + 1)] = 1.0
        return W
    rr, aa = np.meshgrid(np.arange(r_max + 1), np.arange(r_max + 1), indexing="ij")
    valid = (aa >= 1) & (aa <= rr)
    logw = (
        _log_binom(table, rr - 1, aa - 1)
        + (aa - 1) * math.log(1.0 / u)
        + (rr - aa) * math.log1p(-1.0 / u)
    )
    W[valid] = np.exp(logw[valid])
    return W


def cloud_weight_matrix(
    c_values: np.ndarray, p: float, table: np.ndarray
) -> tuple[np.ndarray, np.ndarray, int]:
    """Binomial(c, p) weights over a windowed b range for every c in c_values.

    Returns (WB, residual, b_lo): WB[i, b - b_lo] = Pr{B = b | C = c_values[i]},
    residual[i] = mass outside the window (accounted to pruning by the caller).
    """
    c_lo, c_hi = int(c_values[0]), int(c_values[-1])
    if p <= 0.0 or c_hi == 0:
        WB = np.zeros((c_values.size, 1))
        WB[:, 0] = 1.0
        return WB, np.zeros(c_values.size), 0
    if p >= 1.0:
        WB = np.zeros((c_values.size, c_hi - c_lo + 1))
        WB[np.arange(c_values.size), c_values - c_lo] = 1.0
        return WB, np.zeros(c_values.size), c_lo
    sigma = math.sqrt(c_hi * p * (1.0 - p))
    b_lo = max(0, int(math.floor(c_lo * p - _B_WINDOW_SIGMAS * sigma - 4.0)))
    b_hi = min(c_hi, int(math.ceil(c_hi * p + _B_WINDOW_SIGMAS * sigma + 4.0)))
    bs = np.arange(b_lo, b_hi + 1)
    cc, bb = np.meshgrid(c_values, bs, indexing="ij")
    logw = _log_binom(table, cc, bb) + bb * math.log(p) + (cc - bb) * math.log1p(-p)
    WB = np.where(np.isneginf(logw), 0.0, np.exp(logw))
    residual = 1.0 - WB.sum(axis=1)
    return WB, residual, b_lo


def step(pmf: StatePmf2, kernel: TransitionKernelRow,
         prune: float = DEFAULT_PRUNE) -> StatePmf2:
    """Advance the joint PMF from u to u-1.

    Phase 1 applies the ripple-departure kernel (r -> r - a, empty ripples pass
    through); phase 2 applies the cloud-departure binomial ((c, r) -> (c - b,
    r + b)).  The two factors are independent, so composing them reproduces
    the joint transition product.
    """
    u = pmf.u
    if u < 1:
        raise ValueError("cannot step below u = 0")
    if kernel.u != u:
        raise ValueError(f"kernel built for u={kernel.u}, pmf at u={u}")
    P = pmf.table
    n_c, n_r = P.shape
    r_max = n_r - 1
    pruned = pmf.pruned_mass
    table = kernel.logfact

    # Phase 1: ripple departures.
    if r_max == 0:
        Q = P.copy()
    else:
        Q = np.zeros((n_c, r_max))
        Q[:, 0] += P[:, 0]
        W = ripple_weight_matrix(r_max, u, table)
        for a in range(1, r_max + 1):
            Q[:, : r_max + 1 - a] += P[:, a:] * W[a:, a][None, :]

    # Phase 2: cloud departures.
    n_rq = Q.shape[1]
    c_values = pmf.c_lo + np.arange(n_c)
    WB, residual, b_lo = cloud_weight_matrix(c_values, kernel.p_u, table)
    b_hi = b_lo + WB.shape[1] - 1
    pruned += float(np.dot(Q.sum(axis=1), residual))
    out_c_lo = max(0, pmf.c_lo - b_hi)
    R = np.zeros((pmf.c_lo + n_c - out_c_lo, n_rq + b_hi))
    for col, b in enumerate(range(b_lo, b_hi + 1)):
        w = WB[:, col]
        src0 = max(0, b - pmf.c_lo)
        if src0 >= n_c or not w[src0:].any():
            continue
        tgt0 = pmf.c_lo + src0 - b - out_c_lo
        span = n_c - src0
        R[tgt0 : tgt0 + span, b : b + n_rq] += Q[src0:, :] * w[src0:, None]

    # Phase 3: prune and trim.
    if prune > 0.0:
        mask = (R > 0.0) & (R < prune)
        if mask.any():
            pruned += float(R[mask].sum())
            R[mask] = 0.0
    R, out_c_lo = _trim2(R, out_c_lo)
    return StatePmf2(u=u - 1, c_lo=out_c_lo, table=R, pruned_mass=pruned)


def initial_pmf(k: int, m: int, dist: DegreeDistribution) -> StatePmf2:
    """Joint PMF at u = k: r ~ Binomial(m, Omega_1) ripple symbols, c = m - r."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return StatePmf2(u=k, c_lo=0, table=np.ones((1, 1)))
    table = logfact_table(m)
    omega1 = dist.omega1
    r = np.arange(m + 1)
    if omega1 <= 0.0:
        probs = np.zeros(m + 1)
        probs[0] = 1.0
    elif omega1 >= 1.0:
        probs = np.zeros(m + 1)
        probs[m] = 1.0
    else:
        logp = (
            _log_binom(table, m, r)
            + r * math.log(omega1)
            + (m - r) * math.log1p(-omega1)
        )
        probs = np.exp(logp)
    nz = np.nonzero(probs)[0]
    r0, r1 = int(nz[0]), int(nz[-1])
    grid = np.zeros((r1 - r0 + 1, r1 + 1))
    for rv in range(r0, r1 + 1):
        grid[(m - rv) - (m - r1), rv] = probs[rv]
    return StatePmf2(u=k, c_lo=m - r1, table=grid)


def iterate_states(
    k: int,
    m: int,
    dist: DegreeDistribution,
    prune: float = DEFAULT_PRUNE,
) -> Iterator[StatePmf2]:
    """Yield the joint (cloud, ripple) PMF for u = k, k-1, ..., 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if dist.d_max > k:
        raise DegreeExceedsK(f"d_max {dist.d_max} > k {k}")
    table = logfact_table(max(k, m))
    pmf = initial_pmf(k, m, dist)
    yield pmf
    for u in range(k, 0, -1):
        pmf = step(pmf, make_kernel(u, k, dist, table), prune=prune)
        yield pmf


@dataclass
class MeanResult:
    """Expected inactivations with the per-u empty-ripple profile."""

    k: int
    m: int
    dist_name: str
    expected: float
    per_u: np.ndarray
    pruned_mass: float


def expected_inactivations(
    k: int,
    m: int,
    dist: DegreeDistribution,
    prune: float = DEFAULT_PRUNE,
) -> MeanResult:
    """E[N] = sum over u = 1..k of Pr{ripple empty at u}."""
    profile = np.zeros(k + 1)
    pruned = 0.0
    for pmf in iterate_states(k, m, dist, prune=prune):
        if pmf.u >= 1:
            profile[pmf.u] = pmf.prob_ripple_empty()
        pruned = pmf.pruned_mass
    return MeanResult(
        k=k,
        m=m,
        dist_name=dist.name,
        expected=float(profile.sum()),
        per_u=profile,
        pruned_mass=pruned,
    )


def write_states_csv(states: Iterable[StatePmf2], fh: IO[str]) -> None:
    """Debug dump: u,c,r,prob for every retained state."""
    writer = csv.writer(fh)
    writer.writerow(["u", "c", "r", "prob"])
    for pmf in states:
        for (c, r), p in sorted(pmf.mass.items()):
            writer.writerow([pmf.u, c, r, repr(p)])


def write_mean_sweep_csv(rows: Iterable[tuple[float, float]], fh: IO[str]) -> None:
    """Sweep output: epsilon,expected_inactivations."""
    writer = csv.writer(fh)
    writer.writerow(["epsilon", "expected_inactivations"])
    for eps, expected in rows:
        writer.writerow([f"{eps:g}", repr(expected)])
