"""Inactivation decoding: triangularization, zeroing, GF(2) elimination, back-substitution."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import InconsistentReport, LengthMismatch, NotActive, RankDeficient
from .graph import ACTIVE, INACTIVE, RESOLVABLE, BipartiteGraph, ReducedDegreeView


class BinaryMatrix:
    """Dense GF(2) matrix, rows bit-packed into uint64 words."""

    def __init__(self, rows: int, cols: int, bits: np.ndarray | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        self.words = max(1, -(-self.cols // 64))
        if bits is None:
            self.bits = np.zeros((self.rows, self.words), dtype=np.uint64)
        else:
            self.bits = bits

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "BinaryMatrix":
        dense = np.asarray(dense, dtype=np.uint8) & 1
        mat = cls(dense.shape[0], dense.shape[1])
        for i in range(mat.rows):
            mat.set_row(i, np.nonzero(dense[i])[0])
        return mat

    def copy(self) -> "BinaryMatrix":
        return BinaryMatrix(self.rows, self.cols, self.bits.copy())

    def set_row(self, i: int, cols: Sequence[int]) -> None:
        cols = np.asarray(cols, dtype=np.int64)
        if cols.size:
            np.bitwise_or.at(
                self.bits[i], cols >> 6, np.uint64(1) << (cols & 63).astype(np.uint64)
            )

    def get(self, i: int, j: int) -> int:
        return int((self.bits[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def column(self, j: int) -> np.ndarray:
        """Boolean column vector."""
        return ((self.bits[:, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)).astype(bool)

    def row_dense(self, i: int) -> np.ndarray:
        flat = np.unpackbits(self.bits[i].view(np.uint8), bitorder="little")
        return flat[: self.cols].astype(bool)

    def to_dense(self) -> np.ndarray:
        return np.vstack([self.row_dense(i) for i in range(self.rows)]).astype(np.uint8) if self.rows else np.zeros((0, self.cols), dtype=np.uint8)

    def swap_rows(self, i: int, j: int) -> None:
        if i != j:
            self.bits[[i, j]] = self.bits[[j, i]]

    def xor_row_into(self, src: int, targets: np.ndarray) -> None:
        """rows[targets] ^= rows[src]; targets is a boolean mask."""
        self.bits[targets] ^= self.bits[src]

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "BinaryMatrix":
        out = BinaryMatrix(r1 - r0, c1 - c0)
        for i in range(r0, r1):
            dense = self.row_dense(i)[c0:c1]
            out.set_row(i - r0, np.nonzero(dense)[0])
        return out

    def rank(self) -> int:
        work = self.bits.copy()
        r = 0
        for col in range(self.cols):
            colbits = (work[:, col >> 6] >> np.uint64(col & 63)) & np.uint64(1)
            cand = np.nonzero(colbits[r:])[0]
            if cand.size == 0:
                continue
            p = r + int(cand[0])
            work[[r, p]] = work[[p, r]]
            colbits = (work[:, col >> 6] >> np.uint64(col & 63)) & np.uint64(1)
            mask = colbits.astype(bool)
            mask[r] = False
            if mask.any():
                work[mask] ^= work[r]
            r += 1
            if r == self.rows:
                break
        return r


@dataclass
class InactivationReport:
    """Record of one triangularization run.

    per_step holds (u, ripple size, cloud size) observed before each of the k
    transitions, u descending from k to 1.  pivot_rows lists the ripple output
    chosen at each resolvable step, aligned with resolvable_order.
    """

    k: int
    m: int
    resolvable_order: list[int]
    pivot_rows: list[int]
    inactive_order: list[int]
    per_step: list[tuple[int, int, int]] = field(default_factory=list)
    success: bool | None = None

    @property
    def n_inactivations(self) -> int:
        return len(self.inactive_order)

    @property
    def inactive_set(self) -> set[int]:
        return set(self.inactive_order)

    @property
    def inactivated_flags(self) -> list[int]:
        """1 for each step whose ripple was empty, aligned with per_step."""
        return [1 if r == 0 else 0 for (_, r, _) in self.per_step]


def triangularize(
    graph: BipartiteGraph, rng: np.random.Generator, record_steps: bool = True
) -> InactivationReport:
    """Run exactly k pruning steps with uniform ripple choice and uniform inactivation.

    Each step consumes one integer draw from rng: an index into the ripple when
    it is nonempty, otherwise an index into the active inputs.
    """
    if not graph.all_active():
        raise NotActive("triangularize requires a freshly encoded graph")
    view = ReducedDegreeView(graph)
    resolvable: list[int] = []
    pivots: list[int] = []
    inactive: list[int] = []
    per_step: list[tuple[int, int, int]] = []
    for u in range(graph.k, 0, -1):
        r = len(view.ripple)
        if record_steps:
            per_step.append((u, r, len(view.cloud)))
        if r > 0:
            row = view.ripple.choose(rng)
            v = view.unique_active_neighbor(row)
            resolvable.append(v)
            pivots.append(row)
            view.remove_input(v, RESOLVABLE)
        else:
            v = view.active.choose(rng)
            inactive.append(v)
            view.remove_input(v, INACTIVE)
    return InactivationReport(
        k=graph.k,
        m=graph.m,
        resolvable_order=resolvable,
        pivot_rows=pivots,
        inactive_order=inactive,
        per_step=per_step,
    )


@dataclass
class PermutedSystem:
    """Permuted decoding system: columns resolvable-then-inactive, pivot rows on top."""

    matrix: BinaryMatrix
    col_inputs: list[int]
    row_outputs: list[int]
    n_resolved: int
    n_inactive: int
    payload: np.ndarray

    @property
    def k(self) -> int:
        return self.n_resolved + self.n_inactive


def assemble_permuted(
    graph: BipartiteGraph,
    report: InactivationReport,
    received: np.ndarray | None = None,
) -> PermutedSystem:
    """Build the permuted matrix whose top-left block is lower triangular.

    Rows below the chosen pivot rows keep their original order.  received may
    be omitted for rank-only decoding; a zero-width payload is carried then.
    """
    k, m = graph.k, graph.m
    if report.k != k or report.m != m:
        raise InconsistentReport("report dimensions do not match graph")
    col_inputs = list(report.resolvable_order) + list(report.inactive_order)
    if sorted(col_inputs) != list(range(k)):
        raise InconsistentReport("resolvable and inactive inputs do not partition [0, k)")
    t = len(report.resolvable_order)
    if len(report.pivot_rows) != t or len(set(report.pivot_rows)) != t:
        raise InconsistentReport("pivot rows must be distinct, one per resolvable step")
    pivot_set = set(report.pivot_rows)
    row_outputs = list(report.pivot_rows) + [i for i in range(m) if i not in pivot_set]

    if received is None:
        payload = np.zeros((m, 0), dtype=np.uint8)
    else:
        payload = np.asarray(received, dtype=np.uint8)
        if payload.ndim != 2 or payload.shape[0] != m:
            raise LengthMismatch(f"received must be (m={m}, sym_len), got {payload.shape}")
        payload = payload.copy()

    colpos = np.empty(k, dtype=np.int64)
    colpos[np.array(col_inputs, dtype=np.int64)] = np.arange(k)
    mat = BinaryMatrix(m, k)
    for new_i, orig in enumerate(row_outputs):
        mat.set_row(new_i, colpos[graph.adjacency[orig]])
    payload = payload[np.array(row_outputs, dtype=np.int64)] if m else payload

    for i in range(t):
        if mat.get(i, i) != 1:
            raise InconsistentReport(f"pivot row {i} lacks a unit diagonal entry")
        dense = mat.row_dense(i)
        if dense[i + 1 : t].any():
            raise InconsistentReport(f"pivot row {i} is not lower triangular")
    return PermutedSystem(
        matrix=mat,
        col_inputs=col_inputs,
        row_outputs=row_outputs,
        n_resolved=t,
        n_inactive=k - t,
        payload=payload,
    )


def zero_below(system: PermutedSystem) -> tuple[BinaryMatrix, list[int]]:
    """Diagonalize the triangular block and zero everything below it by row XORs.

    Mutates the system (matrix and payload) in place; the solution set is
    unchanged.  Returns the dense inactive block C' and the original output
    indices of its rows (whose transformed payloads are the known terms).
    """
    mat, pay = system.matrix, system.payload
    t = system.n_resolved
    for j in range(t):
        col = mat.column(j)
        col[: j + 1] = False
        if col.any():
            mat.xor_row_into(j, col)
            if pay.shape[1]:
                pay[col] ^= pay[j]
    cprime = mat.block(t, mat.rows, t, system.k)
    return cprime, system.row_outputs[t:]


def ge_solve(cprime: BinaryMatrix, known: np.ndarray) -> np.ndarray:
    """Solve the dense inactive-variable system by Gauss-Jordan elimination.

    Returns the unique assignment when rank equals the number of variables,
    else raises RankDeficient(rank, needed).  Cost is cubic in the number of
    inactive variables.
    """
    known = np.asarray(known, dtype=np.uint8)
    if known.ndim != 2 or known.shape[0] != cprime.rows:
        raise LengthMismatch(
            f"known terms must be ({cprime.rows}, sym_len), got {known.shape}"
        )
    n = cprime.cols
    work = cprime.copy()
    pay = known.copy()
    pivot_of_col = np.full(n, -1, dtype=np.int64)
    r = 0
    for col in range(n):
        colbits = work.column(col)
        cand = np.nonzero(colbits[r:])[0]
        if cand.size == 0:
            continue
        p = r + int(cand[0])
        work.swap_rows(r, p)
        if pay.shape[1]:
            pay[[r, p]] = pay[[p, r]]
        mask = work.column(col)
        mask[r] = False
        if mask.any():
            work.xor_row_into(r, mask)
            if pay.shape[1]:
                pay[mask] ^= pay[r]
        pivot_of_col[col] = r
        r += 1
    if r < n:
        raise RankDeficient(r, n)
    sol = np.empty((n, known.shape[1]), dtype=np.uint8)
    for col in range(n):
        sol[col] = pay[pivot_of_col[col]]
    return sol


def back_substitute(system: PermutedSystem, inactive_solution: np.ndarray) -> np.ndarray:
    """Recover the full source vector after zero_below and a successful ge_solve."""
    t, n, k = system.n_resolved, system.n_inactive, system.k
    inactive_solution = np.asarray(inactive_solution, dtype=np.uint8)
    if inactive_solution.shape[0] != n:
        raise LengthMismatch(f"expected {n} inactive values, got {inactive_solution.shape[0]}")
    width = system.payload.shape[1]
    source = np.zeros((k, width), dtype=np.uint8)
    for i in range(t):
        val = system.payload[i].copy()
        mask = system.matrix.row_dense(i)[t:]
        if mask.any():
            val ^= np.bitwise_xor.reduce(inactive_solution[mask], axis=0)
        source[system.col_inputs[i]] = val
    for j in range(n):
        source[system.col_inputs[t + j]] = inactive_solution[j]
    return source


def decode(
    graph: BipartiteGraph,
    received: np.ndarray | None,
    rng: np.random.Generator,
) -> tuple[np.ndarray | None, InactivationReport]:
    """Full inactivation decoding; returns (source or None on failure, report).

    Rank deficiency of the inactive block is reported as failure, not raised.
    """
    report = triangularize(graph, rng)
    system = assemble_permuted(graph, report, received)
    cprime, known_rows = zero_below(system)
    try:
        sol = ge_solve(cprime, system.payload[system.n_resolved :])
    except RankDeficient:
        report.success = False
        return None, report
    report.success = True
    return back_substitute(system, sol), report


def write_reports_csv(reports: Iterable[InactivationReport], fh: IO[str]) -> None:
    """Serialize per-step records: trial,u,r_u,c_u,inactivated plus a summary row."""
    writer = csv.writer(fh)
    writer.writerow(["trial", "u", "r_u", "c_u", "inactivated"])
    for trial, report in enumerate(reports):
        flags = report.inactivated_flags
        for (u, r, c), flag in zip(report.per_step, flags):
            writer.writerow([trial, u, r, c, flag])
        writer.writerow([trial, "summary", "", "", report.n_inactivations])
