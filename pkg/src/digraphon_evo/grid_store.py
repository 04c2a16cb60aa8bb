"""Weighted n x n digraph stored as row groups of column segment trees.

Rows are split into groups of ``group_size`` consecutive rows (``ceil(sqrt n)``
by default).  Each group keeps

* ``agg``: a tree over columns whose leaves are the column sums of the group,
* ``rows``: one tree per row,
* ``pending``: per-column factors already applied to ``agg`` but not yet to
  ``rows`` (``None`` when every factor is 1).

A rectangle that covers all rows of a group only touches ``agg`` and
``pending``.  A rectangle that cuts a group first folds ``pending`` into the
rows, updates the affected rows, and then overwrites the ``agg`` nodes of the
column cover with fresh sums collected from the rows.  The subtrees under
those nodes are dropped; when a later operation needs to descend below one of
them the children are recomputed from the rows (``GroupTree._split``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .range_engine import RangeError, RangeTree


@dataclass(frozen=True)
class Segment:
    """Inclusive 1-based rectangle ``[row_lo, row_hi] x [col_lo, col_hi]``."""

    row_lo: int
    row_hi: int
    col_lo: int
    col_hi: int
    weight: float = 1.0

    def __post_init__(self):
        if not (1 <= self.row_lo <= self.row_hi and 1 <= self.col_lo <= self.col_hi):
            raise ValueError(f"malformed segment {self}")
        if not self.weight > 0:
            raise ValueError(f"segment weight must be positive, got {self.weight}")

    def fits(self, n: int) -> bool:
        return self.row_hi <= n and self.col_hi <= n

    @property
    def cells(self) -> int:
        return (self.row_hi - self.row_lo + 1) * (self.col_hi - self.col_lo + 1)

    def slices(self) -> tuple[slice, slice]:
        return slice(self.row_lo - 1, self.row_hi), slice(self.col_lo - 1, self.col_hi)


class GroupTree(RangeTree):
    """Column tree whose dropped subtrees are rebuilt from the group's rows."""

    def __init__(self, n: int, fill: float = 0.0):
        super().__init__(n, fill)
        self._derived = [False]
        self.rebuild: Callable[[int, int, int], tuple[float, float]] | None = None

    @classmethod
    def from_rows_sum(cls, column_sums: np.ndarray) -> "GroupTree":
        tree = cls(len(column_sums))
        tree._build(0, 1, tree.n, [float(v) for v in column_sums])
        return tree

    def _alloc(self) -> int:
        self._derived.extend((False, False))
        return super()._alloc()

    def _split(self, node: int, lo: int, hi: int) -> int:
        if not self._derived[node]:
            return super()._split(node, lo, hi)
        left = self._alloc()
        mid = (lo + hi) // 2
        s_left, s_right = self.rebuild(lo, mid, hi)
        self._sum[left] = s_left
        self._sum[left + 1] = s_right
        self._derived[left] = self._derived[left + 1] = True
        self._mult[node] = 1.0
        self._left[node] = left
        return left

    def assign_cover(self, l: int, r: int, values: list[float]) -> None:
        """Overwrite the canonical cover of ``[l, r]`` with ``values``."""
        self._check(l, r)
        self.op_visit_counter = 0
        it = iter(values)
        self._assign(0, 1, self.n, l, r, it)

    def _assign(self, node: int, lo: int, hi: int, l: int, r: int, it: Iterator[float]) -> None:
        self.op_visit_counter += 1
        if lo > r or hi < l:
            return
        if l <= lo and hi <= r:
            self._sum[node] = next(it)
            self._mult[node] = 1.0
            if lo != hi:
                self._left[node] = -1
                self._derived[node] = True
            return
        left = self._children(node, lo, hi)
        mid = (lo + hi) // 2
        self._assign(left, lo, mid, l, r, it)
        self._assign(left + 1, mid + 1, hi, l, r, it)
        self._sum[node] = self._sum[left] + self._sum[left + 1]


@dataclass
class RowGroup:
    first: int
    last: int
    agg: GroupTree
    rows: list[RangeTree]
    pending: RangeTree | None = None

    @property
    def rows_synced(self) -> bool:
        return self.pending is None


@dataclass
class OpStats:
    visits: int = 0
    trees: int = 0

    def add(self, tree: RangeTree) -> None:
        self.visits += tree.op_visit_counter
        self.trees += 1


class GridStore:
    """n x n nonnegative weighted digraph with 2-D range multiply and sum."""

    def __init__(self, n: int, group_size: int | None = None, fill: float = 0.0,
                 _matrix: np.ndarray | None = None):
        if n < 1:
            raise ValueError("grid size must be positive")
        if fill < 0:
            raise ValueError("negative entry")
        self.n = n
        self.group_size = group_size or math.isqrt(n - 1) + 1
        if self.group_size < 1:
            raise ValueError("group_size must be positive")
        self.groups: list[RowGroup] = []
        self.last_op = OpStats()
        for first in range(1, n + 1, self.group_size):
            last = min(n, first + self.group_size - 1)
            if _matrix is None:
                rows = [RangeTree(n, fill) for _ in range(first, last + 1)]
                agg = GroupTree(n, fill * (last - first + 1))
            else:
                block = _matrix[first - 1:last]
                rows = [RangeTree.build(row) for row in block]
                agg = GroupTree.from_rows_sum(block.sum(axis=0))
            group = RowGroup(first, last, agg, rows)
            agg.rebuild = self._rebuilder(group)
            self.groups.append(group)

    @classmethod
    def from_matrix(cls, matrix, group_size: int | None = None) -> "GridStore":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        if m.shape[0] == 0:
            raise ValueError("empty matrix")
        if (m < 0).any() or not np.isfinite(m).all():
            raise ValueError("negative entry")
        return cls(m.shape[0], group_size, _matrix=m)

    @classmethod
    def filled(cls, n: int, value: float = 1.0, group_size: int | None = None) -> "GridStore":
        """Constant grid built lazily; memory grows only with the operations."""
        return cls(n, group_size, fill=value)

    def _rebuilder(self, group: RowGroup):
        def rebuild(lo: int, mid: int, hi: int) -> tuple[float, float]:
            # pending is constant on [lo, hi] whenever a dropped node is entered
            f = 1.0 if group.pending is None else group.pending.lazy_sum(lo, lo)
            if group.pending is not None:
                self.last_op.add(group.pending)
            s_left = s_right = 0.0
            for row in group.rows:
                a, b = row.child_sums(lo, hi)
                s_left += a
                s_right += b
                self.last_op.add(row)
            return f * s_left, f * s_right
        return rebuild

    # -- helpers -------------------------------------------------------------

    def _check_rect(self, X: Segment) -> None:
        if not X.fits(self.n):
            raise RangeError(f"segment {X} out of bounds for n={self.n}")

    def _touched(self, X: Segment) -> Iterator[tuple[RowGroup, bool]]:
        g0 = (X.row_lo - 1) // self.group_size
        g1 = (X.row_hi - 1) // self.group_size
        for group in self.groups[g0:g1 + 1]:
            yield group, X.row_lo <= group.first and group.last <= X.row_hi

    def _sync(self, group: RowGroup) -> None:
        if group.pending is None:
            return
        for row in group.rows:
            row.absorb(group.pending)
            self.last_op.add(row)
        group.pending = None

    def full_extent(self) -> Segment:
        return Segment(1, self.n, 1, self.n)

    # -- operations ----------------------------------------------------------

    def range_sum_2d(self, X: Segment) -> float:
        self._check_rect(X)
        self.last_op = OpStats()
        total = 0.0
        c, d = X.col_lo, X.col_hi
        for group, full in self._touched(X):
            if full:
                total += group.agg.lazy_sum(c, d)
                self.last_op.add(group.agg)
                continue
            self._sync(group)
            for i in range(max(X.row_lo, group.first), min(X.row_hi, group.last) + 1):
                row = group.rows[i - group.first]
                total += row.lazy_sum(c, d)
                self.last_op.add(row)
        return total

    def range_multiply_2d(self, X: Segment, c: float) -> None:
        self._check_rect(X)
        if c < 0:
            raise ValueError("negative weight multiplier")
        if not math.isfinite(c):
            raise ValueError("non-finite weight multiplier")
        self.last_op = OpStats()
        lo, hi = X.col_lo, X.col_hi
        for group, full in self._touched(X):
            if full:
                # agg first: its rebuild hook reads pending before this update
                group.agg.lazy_multiply(lo, hi, c)
                self.last_op.add(group.agg)
                if group.pending is None:
                    group.pending = RangeTree(self.n, 1.0)
                group.pending.lazy_multiply(lo, hi, c)
                self.last_op.add(group.pending)
                continue
            self._sync(group)
            for i in range(max(X.row_lo, group.first), min(X.row_hi, group.last) + 1):
                row = group.rows[i - group.first]
                row.lazy_multiply(lo, hi, c)
                self.last_op.add(row)
            cover: list[float] | None = None
            for row in group.rows:
                sums = row.terminal_sums(lo, hi)
                self.last_op.add(row)
                if cover is None:
                    cover = sums
                else:
                    cover = [a + b for a, b in zip(cover, sums)]
            group.agg.assign_cover(lo, hi, cover)
            self.last_op.add(group.agg)

    def preferential_attach(self, X: Segment, theta: float) -> None:
        """G <- (1 - theta) G + theta G|_X."""
        if not 0 <= theta:
            raise ValueError(f"attachment weight must be nonnegative, got {theta}")
        if theta >= 1:
            raise ValueError("degenerate attachment weight")
        self._check_rect(X)
        if theta == 0:
            self.last_op = OpStats()
            return
        self.range_multiply_2d(self.full_extent(), 1.0 - theta)
        stats = self.last_op
        self.range_multiply_2d(X, 1.0 / (1.0 - theta))
        self.last_op.visits += stats.visits
        self.last_op.trees += stats.trees

    def total(self) -> float:
        return sum(g.agg.total for g in self.groups)

    def to_dense(self) -> np.ndarray:
        out = np.empty((self.n, self.n))
        for group in self.groups:
            factors = None if group.pending is None else group.pending.to_values()
            for k, row in enumerate(group.rows):
                vals = row.to_values()
                out[group.first - 1 + k] = vals if factors is None else vals * factors
        return out

    def __repr__(self) -> str:
        return f"GridStore(n={self.n}, group_size={self.group_size}, groups={len(self.groups)})"


def grid_build(matrix, group_size: int | None = None) -> GridStore:
    return GridStore.from_matrix(matrix, group_size)


def range_sum_2d(grid: GridStore, X: Segment) -> float:
    return grid.range_sum_2d(X)


def range_multiply_2d(grid: GridStore, X: Segment, c: float) -> None:
    grid.range_multiply_2d(X, c)


def preferential_attach(grid: GridStore, X: Segment, theta: float) -> None:
    grid.preferential_attach(X, theta)


def to_dense(grid: GridStore) -> np.ndarray:
    return grid.to_dense()
