"""Evolution-by-duplication simulator over a segmented digraph."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .grid_store import GridStore, Segment

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SegmentBasis:
    """Weighted rectangles eligible for duplication; weights sum to 1."""

    segments: tuple[Segment, ...]
    weights: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.segments:
            raise ValueError("segment basis is empty")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.segments),) or not (w > 0).all():
            raise ValueError("basis weights must be positive, one per segment")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("basis weights must sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "cdf", np.cumsum(w))

    @classmethod
    def from_segments(cls, segments: Sequence[Segment], tol: float = 1e-9) -> "SegmentBasis":
        segs = tuple(segments)
        if not segs:
            raise ValueError("segment basis is empty")
        w = np.array([s.weight for s in segs], dtype=float)
        total = w.sum()
        if abs(total - 1.0) > tol:
            log.warning("segment weights sum to %r; renormalizing", total)
        return cls(segs, w / total)

    def check(self, n: int) -> None:
        for s in self.segments:
            if not s.fits(n):
                raise ValueError(f"segment {s} outside a {n}x{n} grid")

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class FixedTheta:
    theta: float

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("fixed theta must lie in (0, 1)")


@dataclass(frozen=True)
class InverseMassTheta:
    """theta = min(theta_max, kappa / mass)."""

    kappa: float = 1.0
    theta_max: float = 0.5

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not 0 < self.theta_max < 1:
            raise ValueError("theta_max must lie in (0, 1)")


ThetaMode = Union[FixedTheta, InverseMassTheta]


@dataclass(frozen=True)
class SimulationConfig:
    steps: int
    seed: int = 0
    theta_mode: ThetaMode = InverseMassTheta()
    snapshot_every: int = 0

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be nonnegative")


@dataclass(frozen=True)
class StepRecord:
    step: int
    segment: int
    theta: float
    segment_mass: float
    total_mass: float


@dataclass
class Trajectory:
    records: list[StepRecord] = field(default_factory=list)
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    CSV_HEADER = "step,segment,theta,segment_mass,total_mass"

    def __len__(self) -> int:
        return len(self.records)

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.records:
            lines.append(f"{r.step},{r.segment},{r.theta!r},{r.segment_mass!r},{r.total_mass!r}")
        return "\n".join(lines) + "\n"


def theta_weight(mass: float, mode: ThetaMode) -> float:
    """Attachment magnitude for a segment holding ``mass``."""
    if mass <= 0:
        return 0.0
    if isinstance(mode, FixedTheta):
        return mode.theta
    return min(mode.theta_max, mode.kappa / mass)


def segment_theta(grid: GridStore, X: Segment, mode: ThetaMode) -> float:
    return theta_weight(grid.range_sum_2d(X), mode)


def select_segment(basis: SegmentBasis, rng: np.random.Generator) -> int:
    """Index of a basis segment drawn with probability equal to its weight.

    Consumes exactly one uniform draw.
    """
    u = rng.random()
    i = int(np.searchsorted(basis.cdf, u, side="right"))
    return min(i, len(basis) - 1)


Selector = Callable[[SegmentBasis, np.random.Generator], int]


def run_simulation(grid: GridStore, basis: SegmentBasis, config: SimulationConfig,
                   rng: np.random.Generator | None = None,
                   selector: Selector = select_segment) -> Trajectory:
    """Run ``config.steps`` attach events on ``grid`` in place."""
    basis.check(grid.n)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    traj = Trajectory()
    for step in range(1, config.steps + 1):
        idx = selector(basis, rng)
        X = basis.segments[idx]
        mass = grid.range_sum_2d(X)
        theta = theta_weight(mass, config.theta_mode)
        grid.preferential_attach(X, theta)
        traj.records.append(StepRecord(step, idx, theta, mass, grid.total()))
        if config.snapshot_every and step % config.snapshot_every == 0:
            traj.snapshots[step] = grid.to_dense()
    return traj


def normalized_snapshot_distance(A, B) -> float:
    """L1 distance between two nonnegative matrices scaled to unit mass."""
    a = np.asarray(A, dtype=float)
    b = np.asarray(B, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    sa, sb = a.sum(), b.sum()
    if sa == 0 and sb == 0:
        return 0.0
    if sa == 0 or sb == 0:
        raise ValueError("cannot normalize a zero-mass matrix against a nonzero one")
    return float(np.abs(a / sa - b / sb).sum())
