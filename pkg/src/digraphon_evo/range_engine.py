"""Segment tree with lazy range-multiply and range-sum.

Nodes live in flat lists; the two children of a node are allocated next to
each other, so only the left child index is stored.  A node's ``sum`` already
includes its own ``mult``; ``mult`` is the factor still owed to the children.
Leaves never hold a pending factor.

Trees are either built eagerly from an array (``RangeTree.build``) or start
as a single uniform root (``RangeTree(n, fill)``) whose children are created
on first use.  An internal node without children stands for a uniform run of
values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class RangeError(ValueError):
    pass


@dataclass(frozen=True)
class LazyNode:
    """Read-only view of one node, for inspection and tests."""

    low: int
    high: int
    sum: float
    mult: float
    has_children: bool


class RangeTree:
    """1-based range-multiply / range-sum tree over ``n`` reals."""

    def __init__(self, n: int, fill: float = 0.0):
        if n < 1:
            raise RangeError("empty array")
        self.n = n
        self._sum = [float(fill) * n]
        self._mult = [1.0]
        self._left = [-1]
        self.op_visit_counter = 0
        self.trace: list[tuple[int, int]] | None = None

    @classmethod
    def build(cls, values: Sequence[float]) -> "RangeTree":
        vals = [float(v) for v in values]
        if not vals:
            raise RangeError("empty array")
        tree = cls(len(vals))
        tree._build(0, 1, tree.n, vals)
        return tree

    def _build(self, node: int, lo: int, hi: int, vals: list[float]) -> float:
        if lo == hi:
            self._sum[node] = vals[lo - 1]
            return self._sum[node]
        left = self._alloc()
        mid = (lo + hi) // 2
        total = self._build(left, lo, mid, vals) + self._build(left + 1, mid + 1, hi, vals)
        self._left[node] = left
        self._sum[node] = total
        return total

    def _alloc(self) -> int:
        idx = len(self._sum)
        self._sum.extend((0.0, 0.0))
        self._mult.extend((1.0, 1.0))
        self._left.extend((-1, -1))
        return idx

    def _split(self, node: int, lo: int, hi: int) -> int:
        """Create children for a childless internal node (uniform run)."""
        left = self._alloc()
        mid = (lo + hi) // 2
        per = self._sum[node] / (hi - lo + 1)
        self._sum[left] = per * (mid - lo + 1)
        self._sum[left + 1] = per * (hi - mid)
        self._mult[node] = 1.0
        self._left[node] = left
        return left

    def _children(self, node: int, lo: int, hi: int) -> int:
        """Return the left child after pushing this node's pending factor."""
        left = self._left[node]
        if left < 0:
            return self._split(node, lo, hi)
        m = self._mult[node]
        if m != 1.0:
            s = self._sum
            mult = self._mult
            mid = (lo + hi) // 2
            s[left] *= m
            s[left + 1] *= m
            if mid > lo:
                mult[left] *= m
            if hi > mid + 1:
                mult[left + 1] *= m
            mult[node] = 1.0
        return left

    def _check(self, l: int, r: int) -> None:
        if not (1 <= l <= r <= self.n):
            raise RangeError(f"range out of bounds: [{l}, {r}] for n={self.n}")

    # -- range multiply ------------------------------------------------------

    def lazy_multiply(self, l: int, r: int, c: float) -> None:
        """Multiply every value in ``[l, r]`` by ``c``."""
        self._check(l, r)
        self.op_visit_counter = 0
        self._mul(0, 1, self.n, l, r, float(c))

    def _mul(self, node: int, lo: int, hi: int, l: int, r: int, c: float) -> None:
        self.op_visit_counter += 1
        if lo > r or hi < l:
            return
        s = self._sum
        if l <= lo and hi <= r:
            s[node] *= c
            if lo != hi:
                self._mult[node] *= c
            if self.trace is not None:
                self.trace.append((lo, hi))
            return
        left = self._left[node]
        if left < 0 or self._mult[node] != 1.0:
            left = self._children(node, lo, hi)
        mid = (lo + hi) // 2
        if l <= mid:
            self._mul(left, lo, mid, l, r, c)
        else:
            self.op_visit_counter += 1
        if r > mid:
            self._mul(left + 1, mid + 1, hi, l, r, c)
        else:
            self.op_visit_counter += 1
        s[node] = s[left] + s[left + 1]

    # -- range sum -----------------------------------------------------------

    def lazy_sum(self, l: int, r: int) -> float:
        """Sum of the values in ``[l, r]``."""
        self._check(l, r)
        self.op_visit_counter = 0
        return self._sm(0, 1, self.n, l, r)

    def _sm(self, node: int, lo: int, hi: int, l: int, r: int) -> float:
        self.op_visit_counter += 1
        if l <= lo and hi <= r:
            if self.trace is not None:
                self.trace.append((lo, hi))
            return self._sum[node]
        left = self._left[node]
        if left < 0 or self._mult[node] != 1.0:
            left = self._children(node, lo, hi)
        mid = (lo + hi) // 2
        total = 0.0
        # a disjoint child is still a visit: it returns 0 without recursing
        if l <= mid:
            total += self._sm(left, lo, mid, l, r)
        else:
            self.op_visit_counter += 1
        if r > mid:
            total += self._sm(left + 1, mid + 1, hi, l, r)
        else:
            self.op_visit_counter += 1
        return total

    def terminal_sums(self, l: int, r: int) -> list[float]:
        """Sums of the canonical cover of ``[l, r]``, left to right.

        Every tree over the same ``n`` splits identically, so the i-th entry
        refers to the same column block in all of them.
        """
        self._check(l, r)
        self.op_visit_counter = 0
        out: list[float] = []
        self._collect(0, 1, self.n, l, r, out)
        return out

    def _collect(self, node: int, lo: int, hi: int, l: int, r: int, out: list[float]) -> None:
        self.op_visit_counter += 1
        if lo > r or hi < l:
            return
        if l <= lo and hi <= r:
            out.append(self._sum[node])
            return
        left = self._children(node, lo, hi)
        mid = (lo + hi) // 2
        self._collect(left, lo, mid, l, r, out)
        self._collect(left + 1, mid + 1, hi, l, r, out)

    def child_sums(self, lo: int, hi: int) -> tuple[float, float]:
        """Sums of the two halves of the node covering exactly ``[lo, hi]``."""
        self._check(lo, hi)
        self.op_visit_counter = 0
        node, a, b = 0, 1, self.n
        while True:
            self.op_visit_counter += 1
            left = self._children(node, a, b)
            mid = (a + b) // 2
            if (a, b) == (lo, hi):
                return self._sum[left], self._sum[left + 1]
            if hi <= mid:
                node, b = left, mid
            elif lo > mid:
                node, a = left + 1, mid + 1
            else:
                raise RangeError(f"[{lo}, {hi}] is not a node of this tree")

    def absorb(self, factors: "RangeTree") -> None:
        """Multiply this tree elementwise by the values held in ``factors``.

        Walks both trees together; cost is proportional to the number of
        materialized nodes in ``factors``, not to ``n``.
        """
        if factors.n != self.n:
            raise RangeError("size mismatch")
        self.op_visit_counter = 0
        self._absorb(0, 0, 1, self.n, factors, 1.0)

    def _absorb(self, node: int, fnode: int, lo: int, hi: int, f: "RangeTree", carry: float) -> None:
        self.op_visit_counter += 1
        fleft = f._left[fnode]
        if fleft < 0 or lo == hi:
            factor = carry * f._sum[fnode] / (hi - lo + 1)
            if factor != 1.0:
                self._sum[node] *= factor
                if lo != hi:
                    self._mult[node] *= factor
            return
        left = self._children(node, lo, hi)
        mid = (lo + hi) // 2
        carry *= f._mult[fnode]
        self._absorb(left, fleft, lo, mid, f, carry)
        self._absorb(left + 1, fleft + 1, mid + 1, hi, f, carry)
        self._sum[node] = self._sum[left] + self._sum[left + 1]

    # -- inspection ----------------------------------------------------------

    @property
    def total(self) -> float:
        return self._sum[0]

    @property
    def node_count(self) -> int:
        return len(self._sum)

    def to_values(self) -> np.ndarray:
        """Materialize all values without changing the tree."""
        out = np.empty(self.n)
        stack = [(0, 1, self.n, 1.0)]
        s, m, lf = self._sum, self._mult, self._left
        while stack:
            node, lo, hi, carry = stack.pop()
            left = lf[node]
            if left < 0:
                out[lo - 1:hi] = carry * s[node] / (hi - lo + 1)
                continue
            mid = (lo + hi) // 2
            carry *= m[node]
            stack.append((left, lo, mid, carry))
            stack.append((left + 1, mid + 1, hi, carry))
        return out

    def nodes(self) -> Iterator[LazyNode]:
        stack = [(0, 1, self.n)]
        while stack:
            node, lo, hi = stack.pop()
            left = self._left[node]
            yield LazyNode(lo, hi, self._sum[node], self._mult[node], left >= 0)
            if left >= 0:
                mid = (lo + hi) // 2
                stack.append((left, lo, mid))
                stack.append((left + 1, mid + 1, hi))

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"RangeTree(n={self.n}, total={self.total!r})"


def build(values: Sequence[float]) -> RangeTree:
    return RangeTree.build(values)


def lazy_multiply(tree: RangeTree, l: int, r: int, c: float) -> None:
    tree.lazy_multiply(l, r, c)


def lazy_sum(tree: RangeTree, l: int, r: int) -> float:
    return tree.lazy_sum(l, r)


def to_values(tree: RangeTree) -> np.ndarray:
    return tree.to_values()
