"""Extended decoder-state recursion: full distribution of the inactivation count.

The state gains a third coordinate n = inactivations so far.  Transitions with
a nonempty ripple keep n; an empty ripple increments it.  The (cloud, ripple)
kernels are shared with the first-order recursion, so marginalizing over n
reproduces it exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

from .analysis import (
    DEFAULT_PRUNE,
    StatePmf2,
    TransitionKernelRow,
    cloud_weight_matrix,
    initial_pmf,
    logfact_table,
    make_kernel,
    ripple_weight_matrix,
)
from .degree import DegreeDistribution
from .errors import DegreeExceedsK


@dataclass
class StatePmf3:
    """Sparse joint PMF of (cloud size, ripple size, inactivations so far) at u.

    table[i, j, n] = Pr{C_u = c_lo + i, R_u = j, N_u = n}.
    """

    u: int
    c_lo: int
    table: np.ndarray
    pruned_mass: float = 0.0

    @property
    def mass(self) -> dict[tuple[int, int, int], float]:
        out = {}
        for i, j, n in zip(*np.nonzero(self.table)):
            out[(self.c_lo + int(i), int(j), int(n))] = float(self.table[i, j, n])
        return out

    def total(self) -> float:
        return float(self.table.sum())

    def marginal_cr(self) -> StatePmf2:
        """Project onto (cloud, ripple) for consistency checks."""
        return StatePmf2(
            u=self.u,
            c_lo=self.c_lo,
            table=self.table.sum(axis=2),
            pruned_mass=self.pruned_mass,
        )

    def marginal_n(self) -> np.ndarray:
        return self.table.sum(axis=(0, 1))


def _trim3(table: np.ndarray, c_lo: int) -> tuple[np.ndarray, int]:
    cs = np.nonzero(table.any(axis=(1, 2)))[0]
    rs = np.nonzero(table.any(axis=(0, 2)))[0]
    ns = np.nonzero(table.any(axis=(0, 1)))[0]
    if cs.size == 0:
        return np.zeros((1, 1, 1)), c_lo
    return (
        table[cs[0] : cs[-1] + 1, : rs[-1] + 1, : ns[-1] + 1].copy(),
        c_lo + int(cs[0]),
    )


def initial_pmf3(k: int, m: int, dist: DegreeDistribution) -> StatePmf3:
    """Same binomial initial condition as the first-order chain, with n = 0."""
    base = initial_pmf(k, m, dist)
    return StatePmf3(
        u=base.u, c_lo=base.c_lo, table=base.table[:, :, None].copy()
    )


def step3(pmf: StatePmf3, kernel: TransitionKernelRow,
          prune: float = DEFAULT_PRUNE) -> StatePmf3:
    """Advance the extended PMF from u to u-1.

    Identical (c, r) kernels as the first-order step; the r = 0 plane shifts
    n to n + 1 while the r > 0 planes keep n.
    """
    u = pmf.u
    if u < 1:
        raise ValueError("cannot step below u = 0")
    if kernel.u != u:
        raise ValueError(f"kernel built for u={kernel.u}, pmf at u={u}")
    P = pmf.table
    n_c, n_r, n_n = P.shape
    r_max = n_r - 1
    pruned = pmf.pruned_mass
    table = kernel.logfact

    # Phase 1: ripple departures for r > 0 (n kept); empty-ripple plane moves
    # to n + 1 (the inactivation).
    n_rq = max(r_max, 1)
    Q = np.zeros((n_c, n_rq, n_n + 1))
    Q[:, 0, 1:] += P[:, 0, :]
    if r_max > 0:
        W = ripple_weight_matrix(r_max, u, table)
        for a in range(1, r_max + 1):
            Q[:, : r_max + 1 - a, :n_n] += P[:, a:, :] * W[a:, a][None, :, None]

    # Phase 2: cloud departures, applied uniformly across n.
    c_values = pmf.c_lo + np.arange(n_c)
    WB, residual, b_lo = cloud_weight_matrix(c_values, kernel.p_u, table)
    b_hi = b_lo + WB.shape[1] - 1
    pruned += float(np.dot(Q.sum(axis=(1, 2)), residual))
    out_c_lo = max(0, pmf.c_lo - b_hi)
    R = np.zeros((pmf.c_lo + n_c - out_c_lo, n_rq + b_hi, n_n + 1))
    for col, b in enumerate(range(b_lo, b_hi + 1)):
        w = WB[:, col]
        src0 = max(0, b - pmf.c_lo)
        if src0 >= n_c or not w[src0:].any():
            continue
        tgt0 = pmf.c_lo + src0 - b - out_c_lo
        span = n_c - src0
        R[tgt0 : tgt0 + span, b : b + n_rq, :] += Q[src0:, :, :] * w[src0:, None, None]

    if prune > 0.0:
        mask = (R > 0.0) & (R < prune)
        if mask.any():
            pruned += float(R[mask].sum())
            R[mask] = 0.0
    R, out_c_lo = _trim3(R, out_c_lo)
    return StatePmf3(u=u - 1, c_lo=out_c_lo, table=R, pruned_mass=pruned)


def iterate_states3(
    k: int,
    m: int,
    dist: DegreeDistribution,
    prune: float = DEFAULT_PRUNE,
) -> Iterator[StatePmf3]:
    """Yield the extended PMF for u = k, k-1, ..., 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if dist.d_max > k:
        raise DegreeExceedsK(f"d_max {dist.d_max} > k {k}")
    table = logfact_table(max(k, m))
    pmf = initial_pmf3(k, m, dist)
    yield pmf
    for u in range(k, 0, -1):
        pmf = step3(pmf, make_kernel(u, k, dist, table), prune=prune)
        yield pmf


@dataclass
class DistResult:
    """Distribution of the total number of inactivations."""

    k: int
    m: int
    dist_name: str
    pmf: np.ndarray  # index n = 0..k
    pruned_mass: float

    @property
    def expected(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    @property
    def cdf(self) -> np.ndarray:
        return cumulative(self.pmf)


def inactivation_distribution(
    k: int,
    m: int,
    dist: DegreeDistribution,
    prune: float = DEFAULT_PRUNE,
) -> DistResult:
    """f_N(n): marginal over n of the state PMF once no inputs remain active."""
    final = None
    for final in iterate_states3(k, m, dist, prune=prune):
        pass
    assert final is not None and final.u == 0
    marginal = final.marginal_n()
    pmf = np.zeros(k + 1)
    pmf[: marginal.size] = marginal
    return DistResult(
        k=k, m=m, dist_name=dist.name, pmf=pmf, pruned_mass=final.pruned_mass
    )


def cumulative(pmf: np.ndarray) -> np.ndarray:
    """Prefix sums of a PMF over n; terminal value equals the retained mass."""
    return np.cumsum(np.asarray(pmf, dtype=np.float64))


def failure_lower_bound(cdf: np.ndarray, n_star: int) -> float:
    """Lower bound on decoding failure for a decoder capped at n_star inactivations.

    A cap of n_star fails whenever more than n_star inactivations are needed,
    which happens with probability at least 1 - F(n_star).
    """
    if n_star < 0 or n_star >= cdf.size:
        raise ValueError(f"n_star must be in [0, {cdf.size - 1}]")
    return float(1.0 - cdf[n_star])


def write_distribution_csv(result: DistResult, fh: IO[str]) -> None:
    """Reproduction artifact: n,probability,cumulative."""
    writer = csv.writer(fh)
    writer.writerow(["n", "probability", "cumulative"])
    cdf = result.cdf
    for n in range(result.pmf.size):
        writer.writerow([n, repr(float(result.pmf[n])), repr(float(cdf[n]))])
