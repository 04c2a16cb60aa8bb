"""Step digraphons: canonical embedding, W-random sampling, norms, cut distance.

A step digraphon with ``k`` steps is a ``k x k`` array; cell ``(i, j)`` holds
the value on ``[i/k, (i+1)/k) x [j/k, (j+1)/k)``.  Integrals over ``[0,1]^2``
are therefore cell sums divided by ``k**2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_EXACT_CUT = 16
MAX_RELABEL = 8


@dataclass(frozen=True, eq=False)
class StepDigraphon:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"step digraphon needs a nonempty square array, got {v.shape}")
        if not ((v >= 0) & (v <= 1)).all():
            raise ValueError("digraphon values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    def __call__(self, x: float, y: float) -> float:
        return evaluate(self, x, y)


@dataclass(frozen=True, eq=False)
class WeightedSample:
    points: np.ndarray
    H: np.ndarray


@dataclass(frozen=True, eq=False)
class SimpleDigraph:
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.array(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if np.diag(a).any():
            raise ValueError("self loops are not allowed")
        a = a.astype(np.int8)
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def relabel(self, perm) -> "SimpleDigraph":
        p = np.asarray(perm)
        return SimpleDigraph(self.adjacency[np.ix_(p, p)])


def from_digraph(adjacency) -> StepDigraphon:
    return StepDigraphon(adjacency)


def _cell(k: int, x: float) -> int:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"coordinate {x} outside [0, 1]")
    return min(int(x * k), k - 1)


def evaluate(W: StepDigraphon, x: float, y: float) -> float:
    return float(W.values[_cell(W.k, x), _cell(W.k, y)])


def sample_weighted(W: StepDigraphon, k: int, rng: np.random.Generator) -> WeightedSample:
    """Draw ``k`` latent points and the induced edge-probability matrix."""
    if k < 1:
        raise ValueError("sample size must be positive")
    x = rng.random(k)
    idx = np.minimum((x * W.k).astype(int), W.k - 1)
    return WeightedSample(x, W.values[np.ix_(idx, idx)].copy())


def realize(H: WeightedSample, rng: np.random.Generator) -> SimpleDigraph:
    """Independent Bernoulli edges on ordered pairs; the diagonal is ignored."""
    p = np.asarray(H.H)
    a = (rng.random(p.shape) < p).astype(np.int8)
    np.fill_diagonal(a, 0)
    return SimpleDigraph(a)


def collision_probability_bound(k: int, n: int) -> float:
    """C(k, 2) / n: chance that k points on n steps share a step (union bound)."""
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    return math.comb(k, 2) / n


def lp_norm(W, p: float = 1.0) -> float:
    v = np.abs(_values(W))
    if p == math.inf:
        return float(v.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(v ** p) ** (1.0 / p))


def _values(W) -> np.ndarray:
    return W.values if isinstance(W, StepDigraphon) else np.asarray(W, dtype=float)


def _subset_masks(k: int) -> np.ndarray:
    bits = np.arange(1 << k)[:, None] >> np.arange(k)[None, :]
    return (bits & 1).astype(float)


def cut_norm_exact(D) -> float:
    """Cut norm of a step kernel by enumerating row sets.

    For a fixed row set S the best column set keeps either every column with a
    positive column sum or every column with a negative one, so only the
    ``2**k`` row sets need enumerating.
    """
    d = np.asarray(_values(D), dtype=float)
    k = d.shape[0]
    if d.shape != (k, k):
        raise ValueError("kernel must be square")
    if k > MAX_EXACT_CUT:
        raise ValueError(f"k={k} exceeds exact cut-norm size ({MAX_EXACT_CUT})")
    colsums = _subset_masks(k) @ d
    best = max(np.clip(colsums, 0, None).sum(axis=1).max(),
               -np.clip(colsums, None, 0).sum(axis=1).min())
    return float(best) / k**2


@dataclass(frozen=True)
class CutNormBounds:
    lower: float
    upper: float


def cut_norm_bounds(D, rng: np.random.Generator, restarts: int = 8, max_rounds: int = 50) -> CutNormBounds:
    """Certified sandwich for kernels too large to enumerate.

    ``lower`` is the best box found by alternating local search (each value
    is attained by an actual pair S, T); ``upper`` is the smaller of the L1
    norm and the spectral bound ``sigma_max / k``.
    """
    d = np.asarray(_values(D), dtype=float)
    k = d.shape[0]
    lower = 0.0
    for sign in (1.0, -1.0):
        m = sign * d
        for _ in range(restarts):
            s = rng.random(k) < 0.5
            best = -np.inf
            for _ in range(max_rounds):
                t = (s @ m) > 0
                s = (m @ t) > 0
                val = float(s @ m @ t)
                if val <= best:
                    break
                best = val
            lower = max(lower, best / k**2)
    upper = min(float(np.abs(d).mean()), float(np.linalg.norm(d, 2)) / k)
    return CutNormBounds(lower, upper)


def _same_k(W1, W2) -> tuple[np.ndarray, np.ndarray]:
    a, b = _values(W1), _values(W2)
    if a.shape != b.shape:
        raise ValueError(f"step counts differ: {a.shape} vs {b.shape}")
    return a, b


def cut_distance_labeled(W1, W2) -> float:
    a, b = _same_k(W1, W2)
    return cut_norm_exact(a - b)


def _adj(G) -> np.ndarray:
    return G.adjacency if isinstance(G, SimpleDigraph) else np.asarray(G, dtype=float)


def cut_distance_unlabeled(G1, G2) -> float:
    """Minimum labeled cut distance over all vertex relabelings of ``G1``."""
    a, b = _adj(G1).astype(float), _adj(G2).astype(float)
    if a.shape != b.shape:
        raise ValueError("graphs must have the same number of vertices")
    n = a.shape[0]
    if n > MAX_RELABEL:
        raise ValueError(f"n={n} exceeds exhaustive relabeling limit ({MAX_RELABEL})")
    best = math.inf
    for perm in itertools.permutations(range(n)):
        p = np.array(perm)
        best = min(best, cut_norm_exact(a[np.ix_(p, p)] - b))
        if best == 0.0:
            break
    return best


def d1_distance(G1, G2) -> float:
    a, b = _adj(G1).astype(float), _adj(G2).astype(float)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    return float(np.abs(a - b).sum()) / a.shape[0] ** 2
