"""Timing and visit counts for preferential attachment against a dense baseline."""

from __future__ import annotations

import gc
import statistics
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .evolution import SegmentBasis, select_segment
from .grid_store import GridStore, Segment

Workload = Literal["overlap", "full-rows"]

# four overlapping blocks on a 9 x 9 reference grid, as (x0, x1), (y0, y1)
_OVERLAP_BLOCKS = (((0, 6), (0, 6)), ((4, 9), (4, 9)), ((5, 9), (0, 5)), ((0, 5), (5, 9)))


def _scale(a: int, b: int, n: int) -> tuple[int, int]:
    lo = max(1, round(a * n / 9) + 1)
    return lo, max(lo, round(b * n / 9))


def overlap_basis(n: int) -> SegmentBasis:
    """Four overlapping rectangles scaled to an n x n grid, equal weights."""
    segs = []
    for (x0, x1), (y0, y1) in _OVERLAP_BLOCKS:
        r0, r1 = _scale(y0, y1, n)
        c0, c1 = _scale(x0, x1, n)
        segs.append(Segment(r0, r1, c0, c1, 0.25))
    return SegmentBasis.from_segments(segs)


def full_row_basis(n: int) -> SegmentBasis:
    """Horizontal bands spanning every column."""
    cut = max(1, n // 2)
    segs = [Segment(1, cut, 1, n, 0.5), Segment(min(cut + 1, n), n, 1, n, 0.5)]
    return SegmentBasis.from_segments(segs)


BASES: dict[str, Callable[[int], SegmentBasis]] = {"overlap": overlap_basis, "full-rows": full_row_basis}


@dataclass(frozen=True)
class BenchRow:
    n: int
    structure_ns: float
    dense_ns: float | None
    visits: float

    CSV_HEADER = "n,structure_ns,dense_ns,visits"

    def csv(self) -> str:
        dense = "" if self.dense_ns is None else f"{self.dense_ns:.0f}"
        return f"{self.n},{self.structure_ns:.0f},{dense},{self.visits:.3f}"


def dense_attach(G: np.ndarray, X: Segment, theta: float) -> None:
    """Naive baseline: scale everything, then undo the scale on X."""
    G *= 1.0 - theta
    G[X.slices()] *= 1.0 / (1.0 - theta)


def _schedule(basis: SegmentBasis, ops: int, rng: np.random.Generator) -> list[Segment]:
    return [basis.segments[select_segment(basis, rng)] for _ in range(ops)]


@contextmanager
def _no_gc():
    # as timeit does: cyclic collection cost scales with the number of live
    # trees, not with the operation being measured
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def time_structure(n: int, schedule: list[Segment], theta: float) -> tuple[float, float]:
    """(ns per attach, mean visits per attach) on a fresh constant grid."""
    grid = GridStore.filled(n, 1.0)
    visits = 0
    with _no_gc():
        t0 = time.perf_counter_ns()
        for X in schedule:
            grid.preferential_attach(X, theta)
            visits += grid.last_op.visits
        elapsed = time.perf_counter_ns() - t0
    return elapsed / len(schedule), visits / len(schedule)


def time_dense(n: int, schedule: list[Segment], theta: float) -> float:
    G = np.ones((n, n))
    with _no_gc():
        t0 = time.perf_counter_ns()
        for X in schedule:
            dense_attach(G, X, theta)
        elapsed = time.perf_counter_ns() - t0
    return elapsed / len(schedule)


def run_bench(sizes, ops: int = 50, reps: int = 5, seed: int = 0, theta: float = 0.1,
              workload: Workload = "overlap", dense_max: int = 4096) -> list[BenchRow]:
    """Median over ``reps`` repetitions of the mean time per attach, per size.

    One untimed repetition per size runs first so allocator warm-up is not
    charged to the first timed run.
    """
    if reps < 1 or ops < 1:
        raise ValueError("reps and ops must be positive")
    rows = []
    for n in sizes:
        if n < 64:
            raise ValueError("bench sizes must be at least 64")
        rng = np.random.default_rng([seed, n])
        schedule = _schedule(BASES[workload](n), ops, rng)
        time_structure(n, schedule, theta)
        runs = [time_structure(n, schedule, theta) for _ in range(reps)]
        s_ns = statistics.median(r[0] for r in runs)
        visits = runs[0][1]
        d_ns = None
        if n <= dense_max:
            time_dense(n, schedule[:1], theta)
            d_ns = statistics.median(time_dense(n, schedule, theta) for _ in range(reps))
        rows.append(BenchRow(n, s_ns, d_ns, visits))
    return rows


def format_csv(rows: list[BenchRow]) -> str:
    return "\n".join([BenchRow.CSV_HEADER] + [r.csv() for r in rows]) + "\n"
