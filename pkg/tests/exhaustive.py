"""Brute-force oracles: exhaustive enumeration of graphs and decoder branches.

These deliberately share no code with the package's recursions or matrix
routines; they re-derive everything from first principles on tiny instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ltinact.degree import DegreeDistribution


@dataclass
class OracleChain:
    """Exact per-u joint PMFs and inactivation distribution for tiny (k, m)."""

    k: int
    m: int
    per_u: dict[int, dict[tuple[int, int, int], float]]  # u -> (c, r, n) -> prob
    f_n: dict[int, float] = field(default_factory=dict)

    @property
    def expected(self) -> float:
        return sum(n * p for n, p in self.f_n.items())

    def joint_cr(self, u: int) -> dict[tuple[int, int], float]:
        out: dict[tuple[int, int], float] = {}
        for (c, r, _), p in self.per_u[u].items():
            key = (c, r)
            out[key] = out.get(key, 0.0) + p
        return out


def _output_options(k: int, dist: DegreeDistribution) -> list[tuple[frozenset[int], float]]:
    """Every possible neighbor set of one output symbol with its probability."""
    options = []
    for d, w in dist.probs.items():
        per_set = w / math.comb(k, d)
        for subset in itertools.combinations(range(k), d):
            options.append((frozenset(subset), per_set))
    return options


def _walk_decoder(
    graph: tuple[frozenset[int], ...],
    active: frozenset[int],
    n_so_far: int,
    weight: float,
    record: dict[int, dict[tuple[int, int, int], float]],
    f_n: dict[int, float],
) -> None:
    u = len(active)
    reduced = [len(nbrs & active) for nbrs in graph]
    r = sum(1 for d in reduced if d == 1)
    c = sum(1 for d in reduced if d >= 2)
    key = (c, r, n_so_far)
    slot = record.setdefault(u, {})
    slot[key] = slot.get(key, 0.0) + weight
    if u == 0:
        f_n[n_so_far] = f_n.get(n_so_far, 0.0) + weight
        return
    if r > 0:
        share = weight / r
        for nbrs, red in zip(graph, reduced):
            if red == 1:
                (v,) = nbrs & active
                _walk_decoder(graph, active - {v}, n_so_far, share, record, f_n)
    else:
        share = weight / u
        for v in active:
            _walk_decoder(graph, active - {v}, n_so_far + 1, share, record, f_n)


def enumerate_chain(k: int, m: int, dist: DegreeDistribution) -> OracleChain:
    """Average the decoder-branch walk over every graph in the ensemble."""
    options = _output_options(k, dist)
    record: dict[int, dict[tuple[int, int, int], float]] = {}
    f_n: dict[int, float] = {}
    everyone = frozenset(range(k))
    for combo in itertools.product(options, repeat=m):
        graph = tuple(nbrs for nbrs, _ in combo)
        weight = math.prod(w for _, w in combo)
        _walk_decoder(graph, everyone, 0, weight, record, f_n)
    return OracleChain(k=k, m=m, per_u=record, f_n=f_n)


def enumerate_decoder_branches(
    k: int, adjacency: list[list[int]]
) -> OracleChain:
    """All decoder random branches on one fixed graph (probability-weighted)."""
    graph = tuple(frozenset(row) for row in adjacency)
    record: dict[int, dict[tuple[int, int, int], float]] = {}
    f_n: dict[int, float] = {}
    _walk_decoder(graph, frozenset(range(k)), 0, 1.0, record, f_n)
    return OracleChain(k=k, m=len(adjacency), per_u=record, f_n=f_n)


# GF(2) reference linear algebra on dense int arrays (independent of the
# package's bit-packed implementation).


def gf2_rank(dense: np.ndarray) -> int:
    work = (np.array(dense, dtype=np.int8) & 1).copy()
    rows, cols = work.shape
    r = 0
    for col in range(cols):
        pivots = np.nonzero(work[r:, col])[0]
        if pivots.size == 0:
            continue
        p = r + int(pivots[0])
        work[[r, p]] = work[[p, r]]
        for i in range(rows):
            if i != r and work[i, col]:
                work[i] ^= work[r]
        r += 1
        if r == rows:
            break
    return r


def gf2_solve(dense: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Unique GF(2) solution of A x = b per column of b, else None."""
    a = (np.array(dense, dtype=np.int8) & 1).copy()
    b = (np.array(rhs, dtype=np.int16)).copy()
    rows, cols = a.shape
    pivot_of_col = [-1] * cols
    r = 0
    for col in range(cols):
        pivots = np.nonzero(a[r:, col])[0]
        if pivots.size == 0:
            continue
        p = r + int(pivots[0])
        a[[r, p]] = a[[p, r]]
        b[[r, p]] = b[[p, r]]
        for i in range(rows):
            if i != r and a[i, col]:
                a[i] ^= a[r]
                b[i] ^= b[r]
        pivot_of_col[col] = r
        r += 1
    if r < cols:
        return None
    return np.array([b[pivot_of_col[c]] for c in range(cols)], dtype=np.uint8)


def solution_set(dense: np.ndarray, rhs: np.ndarray) -> set[tuple[int, ...]]:
    """All GF(2) solutions by exhaustive enumeration (tiny systems only)."""
    a = np.array(dense, dtype=np.int8) & 1
    b = np.array(rhs, dtype=np.int8) & 1
    cols = a.shape[1]
    out = set()
    for bits in itertools.product((0, 1), repeat=cols):
        x = np.array(bits, dtype=np.int8)
        if np.array_equal((a @ x) % 2, b):
            out.add(bits)
    return out
