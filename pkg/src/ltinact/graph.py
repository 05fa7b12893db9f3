"""Bipartite-graph view of an LT code instance and the random encoder."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .degree import DegreeDistribution, sample_degree
from .errors import DegreeExceedsK, LengthMismatch, NotActive

ACTIVE, RESOLVABLE, INACTIVE = 0, 1, 2


class _IndexedSet:
    """Set of small ints with O(1) add, swap-remove, and uniform choice.

    Member order is deterministic (insertion followed by swap-removes), so a
    seeded stream always resolves `choose` to the same element.
    """

    def __init__(self, capacity: int, members: Iterable[int] = ()):
        self._pos = np.full(capacity, -1, dtype=np.int64)
        self._members: list[int] = []
        for x in members:
            self.add(x)

    def add(self, x: int) -> None:
        if self._pos[x] >= 0:
            raise ValueError(f"{x} already present")
        self._pos[x] = len(self._members)
        self._members.append(x)

    def remove(self, x: int) -> None:
        i = self._pos[x]
        if i < 0:
            raise KeyError(x)
        last = self._members.pop()
        if last != x:
            self._members[i] = last
            self._pos[last] = i
        self._pos[x] = -1

    def choose(self, rng: np.random.Generator) -> int:
        return self._members[int(rng.integers(0, len(self._members)))]

    def __contains__(self, x: int) -> bool:
        return bool(self._pos[x] >= 0)

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    def as_set(self) -> set[int]:
        return set(self._members)


class BipartiteGraph:
    """k input symbols, m output symbols, adjacency rows of the binary matrix G.

    Adjacency is stored output-major (sorted neighbor lists) plus an
    input-major index so that removing an input touches only its own edges.
    """

    def __init__(self, k: int, adjacency: Sequence[Sequence[int]]):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)
        self.m = len(adjacency)
        rows = []
        for i, nbrs in enumerate(adjacency):
            row = np.array(sorted(int(v) for v in nbrs), dtype=np.int64)
            if row.size == 0:
                raise ValueError(f"output {i} has no neighbors")
            if row[0] < 0 or row[-1] >= k:
                raise ValueError(f"output {i} has a neighbor outside [0, {k})")
            if np.any(np.diff(row) == 0):
                raise ValueError(f"output {i} repeats a neighbor")
            rows.append(row)
        self.adjacency = rows
        self.degrees = np.array([r.size for r in rows], dtype=np.int64)
        self.input_state = np.full(self.k, ACTIVE, dtype=np.uint8)
        self._in_flat, self._in_off = _input_major_index(self.k, rows)

    def outputs_of(self, v: int) -> np.ndarray:
        """Output rows containing input v, in ascending row order."""
        return self._in_flat[self._in_off[v] : self._in_off[v + 1]]

    def state_counts(self) -> tuple[int, int, int]:
        return (
            int(np.sum(self.input_state == ACTIVE)),
            int(np.sum(self.input_state == RESOLVABLE)),
            int(np.sum(self.input_state == INACTIVE)),
        )

    def all_active(self) -> bool:
        return bool(np.all(self.input_state == ACTIVE))

    def reset_states(self) -> None:
        """Mark every input active again so the graph can be decoded afresh."""
        self.input_state[:] = ACTIVE


def _input_major_index(k: int, rows: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    counts = np.zeros(k + 1, dtype=np.int64)
    for row in rows:
        counts[1:][row] += 1
    off = np.cumsum(counts)
    flat = np.empty(off[-1], dtype=np.int64)
    cursor = off[:-1].copy()
    for i, row in enumerate(rows):
        flat[cursor[row]] = i
        cursor[row] += 1
    return flat, off


def encode(
    k: int,
    m: int,
    dist: DegreeDistribution,
    rng: np.random.Generator,
    cap_degree: bool = False,
) -> BipartiteGraph:
    """Generate m output symbols with degrees from dist and uniform neighbors.

    Neighbor selection without replacement is a partial shuffle bounded by the
    degree, not a full k-permutation.  With cap_degree=True a sampled degree
    above k is clipped to k instead of raising DegreeExceedsK.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if m < 0:
        raise ValueError("m must be >= 0")
    if dist.d_max > k and not cap_degree:
        raise DegreeExceedsK(f"d_max {dist.d_max} > k {k}")
    pool = np.arange(k, dtype=np.int64)
    adjacency = []
    for _ in range(m):
        d = sample_degree(dist, rng)
        if cap_degree:
            d = min(d, k)
        for j in range(d):
            t = int(rng.integers(j, k))
            pool[j], pool[t] = pool[t], pool[j]
        adjacency.append(pool[:d].tolist())
    return BipartiteGraph(k, adjacency)


def payload_encode(graph: BipartiteGraph, source: np.ndarray) -> np.ndarray:
    """XOR the source symbols selected by each output row: c = v G^T.

    Symbols are rows of a uint8 array of equal width.
    """
    source = np.asarray(source, dtype=np.uint8)
    if source.ndim != 2 or source.shape[0] != graph.k:
        raise LengthMismatch(
            f"source must be (k={graph.k}, sym_len) uint8, got {source.shape}"
        )
    out = np.zeros((graph.m, source.shape[1]), dtype=np.uint8)
    for i, row in enumerate(graph.adjacency):
        out[i] = np.bitwise_xor.reduce(source[row], axis=0)
    return out


class ReducedDegreeView:
    """Reduced degrees, ripple, and cloud of a graph during triangularization.

    The ripple holds outputs of reduced degree 1, the cloud those of reduced
    degree >= 2; outputs at reduced degree 0 have left the reduced graph.
    """

    def __init__(self, graph: BipartiteGraph):
        self.graph = graph
        self.reduced_deg = graph.degrees.copy()
        self.ripple = _IndexedSet(graph.m, (i for i in range(graph.m) if graph.degrees[i] == 1))
        self.cloud = _IndexedSet(graph.m, (i for i in range(graph.m) if graph.degrees[i] >= 2))
        self.active = _IndexedSet(
            graph.k, (v for v in range(graph.k) if graph.input_state[v] == ACTIVE)
        )

    def remove_input(self, v: int, mark: int = RESOLVABLE) -> set[int]:
        """Remove active input v, decrementing its neighbors' reduced degrees.

        Returns the outputs whose reduced degree reached 0 or 1.
        """
        if self.graph.input_state[v] != ACTIVE:
            raise NotActive(f"input {v} is not active")
        if mark not in (RESOLVABLE, INACTIVE):
            raise ValueError("mark must be RESOLVABLE or INACTIVE")
        self.graph.input_state[v] = mark
        self.active.remove(v)
        touched: set[int] = set()
        for row in self.graph.outputs_of(v):
            row = int(row)
            rd = self.reduced_deg[row]
            if rd == 0:
                continue
            rd -= 1
            self.reduced_deg[row] = rd
            if rd == 1:
                self.cloud.remove(row)
                self.ripple.add(row)
                touched.add(row)
            elif rd == 0:
                self.ripple.remove(row)
                touched.add(row)
        return touched

    def unique_active_neighbor(self, row: int) -> int:
        """The single active neighbor of a ripple output."""
        if self.reduced_deg[row] != 1:
            raise ValueError(f"output {row} has reduced degree {self.reduced_deg[row]}")
        state = self.graph.input_state
        for v in self.graph.adjacency[row]:
            if state[v] == ACTIVE:
                return int(v)
        raise AssertionError("reduced degree 1 but no active neighbor")

    def recomputed_reduced_degrees(self) -> np.ndarray:
        """Reduced degrees recomputed from scratch (oracle for the incremental path)."""
        state = self.graph.input_state
        return np.array(
            [int(np.sum(state[row] == ACTIVE)) for row in self.graph.adjacency],
            dtype=np.int64,
        )


def dump_graph(graph: BipartiteGraph, path: str | Path) -> None:
    """Write the fixture/debug format: one `output_idx: v_a v_b ...` line per row."""
    with Path(path).open("w") as fh:
        fh.write(f"# k={graph.k} m={graph.m}\n")
        for i, row in enumerate(graph.adjacency):
            fh.write(f"{i}: {' '.join(str(int(v)) for v in row)}\n")


def load_graph(path: str | Path) -> BipartiteGraph:
    """Read the dump_graph format back into a graph."""
    k = None
    rows: dict[int, list[int]] = {}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                for token in text[1:].split():
                    key, _, val = token.partition("=")
                    if key == "k":
                        k = int(val)
                continue
            head, _, tail = text.partition(":")
            rows[int(head)] = [int(t) for t in tail.split()]
    if k is None:
        raise ValueError(f"{path}: missing '# k=... m=...' header")
    adjacency = [rows[i] for i in sorted(rows)]
    if sorted(rows) != list(range(len(rows))):
        raise ValueError(f"{path}: output indices are not contiguous from 0")
    return BipartiteGraph(k, adjacency)
