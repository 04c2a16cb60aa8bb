"""CRP / Dirichlet block model for exchangeable digraphs.

Vertices are partitioned by a Chinese restaurant process; every ordered pair
of clusters ``(r, s)`` gets a categorical distribution over ``K`` edge
categories drawn from ``Dirichlet(beta)``; each ordered vertex pair draws its
category from the distribution of its cluster pair.  With ``K = 2`` category
0 is "no edge" and category 1 is "edge".

Cluster ids are 1-based in the public types and numbered by first
appearance.  Edge-category matrices are integer arrays with an ignored
diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

PRESENT = 1


@dataclass(frozen=True)
class Hyperparams:
    alpha: float
    beta: float | tuple[float, ...] = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if not (b > 0).all():
            raise ValueError("beta must be positive")

    def beta_vector(self, K: int) -> np.ndarray:
        return _broadcast(self.beta, K)


def _broadcast(beta, K: int) -> np.ndarray:
    b = np.asarray(beta, dtype=float)
    if b.ndim == 0:
        b = np.full(K, float(b))
    if b.shape != (K,):
        raise ValueError(f"beta has shape {b.shape}, expected ({K},)")
    if not (b > 0).all():
        raise ValueError("beta must be positive")
    return b


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if not labels:
            raise ValueError("empty assignment")
        object.__setattr__(self, "labels", canonical_labels(labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return max(self.labels)

    @property
    def group_sizes(self) -> tuple[int, ...]:
        return tuple(np.bincount(self.labels, minlength=self.k + 1)[1:].tolist())

    def array(self) -> np.ndarray:
        """0-based cluster index per vertex."""
        return np.asarray(self.labels) - 1

    def same_partition(self, other: "ClusterAssignment") -> bool:
        return self.labels == other.labels


def canonical_labels(labels: Iterable[int]) -> tuple[int, ...]:
    """Renumber clusters 1, 2, ... in order of first appearance."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen) + 1) for x in labels)


# -- CRP ---------------------------------------------------------------------


def crp_step_probabilities(sizes: Sequence[int], alpha: float) -> np.ndarray:
    """Join probabilities for the next element: existing groups, then a new one."""
    w = np.append((1.0 - alpha) * np.asarray(sizes, dtype=float), alpha)
    return w / w.sum()


def crp_sample_many(n: int, alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent CRP draws as a ``(size, n)`` array of 1-based labels.

    Consumes one ``(size, n - 1)`` block of uniforms; draw ``i`` uses row ``i``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    u = rng.random((size, n - 1))
    labels = np.zeros((size, n), dtype=np.int64)
    sizes = np.zeros((size, n + 1))
    sizes[:, 0] = 1.0
    k = np.ones(size, dtype=np.int64)
    rows = np.arange(size)
    for m in range(1, n):
        w = (1.0 - alpha) * sizes
        w[rows, k] = alpha
        cdf = np.cumsum(w, axis=1)
        target = u[:, m - 1] * cdf[:, -1]
        j = np.minimum((cdf <= target[:, None]).sum(axis=1), k)
        labels[:, m] = j
        sizes[rows, j] += 1.0
        k += j == k
    return labels + 1


def crp_sample(n: int, alpha: float, rng: np.random.Generator) -> ClusterAssignment:
    return ClusterAssignment(tuple(crp_sample_many(n, alpha, 1, rng)[0].tolist()))


def crp_expected_clusters(n: int, alpha: float) -> float:
    """Prior mean number of groups after ``n`` elements."""
    return 1.0 + sum(alpha / ((1.0 - alpha) * m + alpha) for m in range(1, n))


def alpha_for_expected_clusters(n: int, k: float) -> float:
    """The alpha whose prior mean group count at size ``n`` equals ``k``."""
    if not 1.0 < k < n:
        raise ValueError("need 1 < k < n")
    return float(brentq(lambda a: crp_expected_clusters(n, a) - k, 1e-12, 1 - 1e-12))


def crp_log_prob(z: ClusterAssignment, alpha: float) -> float:
    """Log probability of ``z`` under the sequential process."""
    sizes: list[int] = []
    logp = 0.0
    for lab in z.labels:
        if not sizes:
            sizes.append(1)
            continue
        m = len(sizes) if lab > len(sizes) else lab - 1
        p = crp_step_probabilities(sizes, alpha)[m]
        logp += math.log(p)
        if lab > len(sizes):
            sizes.append(1)
        else:
            sizes[lab - 1] += 1
    return logp


# -- Dirichlet and the generative model -----------------------------------------


def dirichlet_sample(beta, rng: np.random.Generator) -> np.ndarray:
    """Normalized gamma draws, computed in log space so tiny shapes do not underflow.

    Uses Gamma(a) = Gamma(a + 1) * U**(1/a).
    """
    b = np.atleast_1d(np.asarray(beta, dtype=float))
    if not (b > 0).all():
        raise ValueError("beta must be positive")
    if b.size == 1:
        return np.ones(1)
    logg = np.log(rng.standard_gamma(b + 1.0)) + np.log(rng.random(b.size)) / b
    logg -= logg.max()
    w = np.exp(logg)
    return w / w.sum()


EdgeWeights = dict[tuple[int, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class GeneratedGraph:
    zeta: ClusterAssignment
    eta: EdgeWeights
    edges: np.ndarray


def draw_edge_weights(k: int, beta: np.ndarray, rng: np.random.Generator) -> EdgeWeights:
    """One categorical per ordered cluster pair, diagonal pairs included."""
    return {(r, s): dirichlet_sample(beta, rng)
            for r in range(1, k + 1) for s in range(1, k + 1)}


def sample_edges(zeta: ClusterAssignment, eta: EdgeWeights, uniforms: np.ndarray) -> np.ndarray:
    """Edge categories by inverse CDF from a matrix of uniforms; diagonal set to 0."""
    lab = zeta.array()
    n = zeta.n
    K = len(next(iter(eta.values())))
    k = zeta.k
    cdf = np.empty((k, k, K))
    for (r, s), w in eta.items():
        cdf[r - 1, s - 1] = np.cumsum(w)
    cdf[..., -1] = np.inf
    c = cdf[lab[:, None], lab[None, :]]
    edges = (uniforms[..., None] >= c).sum(axis=-1)
    np.fill_diagonal(edges, 0)
    return edges.astype(np.int64).reshape(n, n)


def generate_digraph(n: int, hyper: Hyperparams, K: int, rng: np.random.Generator) -> GeneratedGraph:
    if n < 2:
        raise ValueError("n must be at least 2")
    if K < 1:
        raise ValueError("K must be positive")
    zeta = crp_sample(n, hyper.alpha, rng)
    eta = draw_edge_weights(zeta.k, hyper.beta_vector(K), rng)
    edges = sample_edges(zeta, eta, rng.random((n, n)))
    return GeneratedGraph(zeta, eta, edges)


# -- sufficient statistics, marginal likelihood, MAP ----------------------------


@dataclass(frozen=True, eq=False)
class BlockCounts:
    """Edge-category counts per ordered cluster pair."""

    m: dict[tuple[int, int], np.ndarray]
    K: int
    n_vertices: int
    include_within: bool = False

    def total(self) -> int:
        return int(sum(v.sum() for v in self.m.values()))


def _one_hot(edges: np.ndarray, K: int) -> np.ndarray:
    """(K, n, n) indicators with a zero diagonal."""
    e = np.asarray(edges)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ValueError("edge matrix must be square")
    off = ~np.eye(e.shape[0], dtype=bool)
    onehot = (e[None, :, :] == np.arange(K)[:, None, None]) & off
    bad = ~np.isin(e, np.arange(K)) & off
    if bad.any():
        raise ValueError(f"edge categories must lie in 0..{K - 1}")
    return onehot.astype(float)


def _block_tensor(edges: np.ndarray, z: np.ndarray, k: int, K: int) -> np.ndarray:
    onehot = _one_hot(edges, K)
    Z = np.zeros((len(z), k))
    Z[np.arange(len(z)), z] = 1.0
    # M[r, s, c] = sum_{i in r, j in s} [edge(i, j) == c]
    return np.einsum("ir,cij,js->rsc", Z, onehot, Z)


def count_blocks(edges, zeta: ClusterAssignment, K: int = 2, include_within: bool = False) -> BlockCounts:
    e = np.asarray(edges)
    if e.shape != (zeta.n, zeta.n):
        raise ValueError(f"edge matrix shape {e.shape} does not match {zeta.n} labels")
    M = np.rint(_block_tensor(e, zeta.array(), zeta.k, K)).astype(np.int64)
    m = {(r + 1, s + 1): M[r, s] for r in range(zeta.k) for s in range(zeta.k)
         if include_within or r != s}
    return BlockCounts(m, K, zeta.n, include_within)


def log_multivariate_beta(omega) -> float:
    w = np.asarray(omega, dtype=float)
    if not (w > 0).all():
        raise ValueError("multivariate beta needs positive arguments")
    return float(gammaln(w).sum() - gammaln(w.sum()))


def _log_mbeta_rows(w: np.ndarray) -> np.ndarray:
    return gammaln(w).sum(axis=-1) - gammaln(w.sum(axis=-1))


def log_marginal(counts: BlockCounts, beta) -> float:
    """sum over pairs of log B(m + beta) - log B(beta)."""
    if not counts.m:
        return 0.0
    b = _broadcast(beta, counts.K)
    M = np.array(list(counts.m.values()), dtype=float)
    return float((_log_mbeta_rows(M + b) - log_multivariate_beta(b)).sum())


Normalization = Literal["pair", "global", "literal"]


def map_estimate(counts: BlockCounts, beta, normalization: Normalization = "pair") -> EdgeWeights:
    """Smoothed edge-category estimate per cluster pair.

    ``"pair"``: (m + beta) / (sum(beta) + sum(m)) per pair, the posterior mean
    of Dirichlet(m + beta); every vector sums to 1.
    ``"global"``: one denominator shared by all (pair, category) slots.
    ``"literal"``: denominator C(n_vertices, 2) * beta + total count, the
    literal closed form with a scalar beta.
    """
    pairs = [p for p in counts.m if p[0] != p[1]]
    if not pairs and not (counts.include_within and counts.m):
        raise ValueError("fewer than two clusters")
    b = _broadcast(beta, counts.K)
    if normalization == "pair":
        return {p: (counts.m[p] + b) / (b.sum() + counts.m[p].sum()) for p in counts.m}
    slots = list(counts.m)
    total = sum(counts.m[p].sum() for p in slots)
    if normalization == "global":
        denom = len(slots) * b.sum() + total
    elif normalization == "literal":
        if not np.allclose(b, b[0]):
            raise ValueError("the literal closed form needs a scalar beta")
        denom = math.comb(counts.n_vertices, 2) * b[0] + total
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return {p: (counts.m[p] + b) / denom for p in counts.m}


def present_edge_matrix(eta: EdgeWeights, k: int, category: int = PRESENT) -> np.ndarray:
    """k x k matrix of one category's probability; missing pairs are NaN."""
    out = np.full((k, k), np.nan)
    for (r, s), w in eta.items():
        out[r - 1, s - 1] = w[category]
    return out


# -- collapsed Gibbs ------------------------------------------------------------


def log_target(edges, z: ClusterAssignment, hyper: Hyperparams, K: int = 2) -> float:
    """CRP prior times the collapsed likelihood of every ordered vertex pair."""
    counts = count_blocks(edges, z, K, include_within=True)
    return crp_log_prob(z, hyper.alpha) + log_marginal(counts, hyper.beta_vector(K))


class _GibbsState:
    """Cluster labels plus the block-count tensor, updated one vertex at a time."""

    def __init__(self, edges: np.ndarray, z0: np.ndarray, K: int, beta: np.ndarray):
        self.onehot = _one_hot(edges, K)
        self.n = len(z0)
        self.K = K
        self.beta = beta
        self.log_b0 = log_multivariate_beta(beta)
        self.z = np.asarray(z0, dtype=int).copy()
        cap = self.n + 1
        self.sizes = np.bincount(self.z, minlength=cap).astype(int)
        self.M = np.zeros((cap, cap, K))
        k = self.z.max() + 1
        self.M[:k, :k] = _block_tensor(edges, self.z, k, K)

    def _f(self, m: np.ndarray) -> np.ndarray:
        return _log_mbeta_rows(m + self.beta) - self.log_b0

    def conditional(self, v: int, alpha: float):
        """Remove ``v`` and return (candidate cluster ids, probabilities).

        The last candidate is a fresh cluster id.
        """
        z = self.z
        a = z[v]
        Z = np.zeros((self.n, self.M.shape[0]))
        Z[np.arange(self.n), z] = 1.0
        Z[v] = 0.0
        out = self.onehot[:, v, :] @ Z   # (K, clusters): edges v -> cluster
        inn = self.onehot[:, :, v] @ Z   # (K, clusters): edges cluster -> v
        out, inn = out.T, inn.T
        self.M[a] -= out
        self.M[:, a] -= inn
        self.sizes[a] -= 1

        act = np.flatnonzero(self.sizes)
        M = self.M[np.ix_(act, act)]
        o, i = out[act], inn[act]
        k = len(act)
        base = self._f(M)
        row_new = M + o[None, :, :]
        row_new[np.arange(k), np.arange(k)] += i
        col_new = M + i[:, None, :]
        diag = np.eye(k, dtype=bool)
        delta = (self._f(row_new) - base).sum(axis=1)
        col_gain = self._f(col_new) - base
        col_gain[diag] = 0.0
        delta += col_gain.sum(axis=0)
        fresh = self._f(o).sum() + self._f(i).sum()

        logw = np.append(np.log((1.0 - alpha) * self.sizes[act]) + delta, math.log(alpha) + fresh)
        logw -= logw.max()
        p = np.exp(logw)
        p /= p.sum()
        new_id = int(np.flatnonzero(self.sizes == 0)[0])
        return np.append(act, new_id), p, out, inn

    def assign(self, v: int, c: int, out: np.ndarray, inn: np.ndarray) -> None:
        self.z[v] = c
        self.M[c] += out
        self.M[:, c] += inn
        self.sizes[c] += 1

    def assignment(self) -> ClusterAssignment:
        return ClusterAssignment(tuple(self.z + 1))


def gibbs_conditional(edges, z: ClusterAssignment, v: int, hyper: Hyperparams,
                      K: int = 2) -> list[tuple[ClusterAssignment, float]]:
    """Full conditional of vertex ``v`` (0-based) given the other labels."""
    state = _GibbsState(np.asarray(edges), z.array(), K, hyper.beta_vector(K))
    cands, p, _, _ = state.conditional(v, hyper.alpha)
    out = []
    for c, pc in zip(cands, p):
        lab = state.z.copy()
        lab[v] = c
        out.append((ClusterAssignment(tuple(lab + 1)), float(pc)))
    return out


@dataclass
class GibbsResult:
    samples: list[ClusterAssignment] = field(default_factory=list)
    log_marginal_trace: list[float] = field(default_factory=list)
    log_target_trace: list[float] = field(default_factory=list)
    burn_in: int = 0

    @property
    def post_burn_in(self) -> list[ClusterAssignment]:
        return self.samples[self.burn_in:]

    def best(self) -> ClusterAssignment:
        """Highest-target state among the post-burn-in samples."""
        tail = self.log_target_trace[1 + self.burn_in:]
        return self.post_burn_in[int(np.argmax(tail))]


def gibbs_clusters(edges, hyper: Hyperparams, K: int, iters: int, rng: np.random.Generator,
                   init: str | ClusterAssignment = "singletons",
                   burn_in: int | None = None) -> GibbsResult:
    """Systematic-scan collapsed Gibbs over cluster assignments.

    One sweep resamples every vertex in index order.  ``samples[t]`` is the
    state after sweep ``t + 1``; the traces start with the initial state.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    e = np.asarray(edges)
    n = e.shape[0]
    if isinstance(init, ClusterAssignment):
        z0 = init.array()
    elif init == "singletons":
        z0 = np.arange(n)
    elif init == "single":
        z0 = np.zeros(n, dtype=int)
    elif init == "random":
        z0 = crp_sample(n, hyper.alpha, rng).array()
    else:
        raise ValueError(f"unknown init {init!r}")
    beta = hyper.beta_vector(K)
    state = _GibbsState(e, z0, K, beta)
    result = GibbsResult(burn_in=iters // 2 if burn_in is None else burn_in)

    def record(z: ClusterAssignment) -> None:
        lm = log_marginal(count_blocks(e, z, K, include_within=True), beta)
        result.log_marginal_trace.append(lm)
        result.log_target_trace.append(lm + crp_log_prob(z, hyper.alpha))

    record(state.assignment())
    for _ in range(iters):
        for v in range(n):
            cands, p, out, inn = state.conditional(v, hyper.alpha)
            j = min(int(np.searchsorted(np.cumsum(p), rng.random(), side="right")), len(p) - 1)
            state.assign(v, int(cands[j]), out, inn)
        z = state.assignment()
        result.samples.append(z)
        record(z)
    return result
