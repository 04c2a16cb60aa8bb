"""Command-line entry point: ``digraphon-evo <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bayes, bench, digraphon
from .evolution import FixedTheta, InverseMassTheta, SegmentBasis, SimulationConfig, run_simulation
from .formats import (FormatError, Report, format_matrix, format_vector, parse_labels,
                      parse_matrix, parse_segments, read_text, write_text)
from .grid_store import GridStore

log = logging.getLogger("digraphon_evo")


def stream(seed: int, label: str, *extra: int) -> np.random.Generator:
    """Independent generator for a named purpose under one global seed."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(label.encode()), *extra))
    return np.random.default_rng(ss)


def _load_matrix(path) -> np.ndarray:
    return parse_matrix(read_text(path), path)


# -- simulate -------------------------------------------------------------------


@dataclass(frozen=True)
class _SimJob:
    matrix: np.ndarray
    basis: SegmentBasis
    config: SimulationConfig
    out_dir: Path
    replica: int | None


def _run_replica(job: _SimJob) -> None:
    grid = GridStore.from_matrix(job.matrix)
    extra = () if job.replica is None else (job.replica,)
    rng = stream(job.config.seed, "simulate", *extra)
    traj = run_simulation(grid, job.basis, job.config, rng)
    suffix = "" if job.replica is None else f"_r{job.replica}"
    write_text(job.out_dir / f"trajectory{suffix}.csv", traj.to_csv())
    for step, snap in traj.snapshots.items():
        write_text(job.out_dir / f"snap_{step}{suffix}.mat", format_matrix(snap))
    write_text(job.out_dir / f"final{suffix}.mat", format_matrix(grid.to_dense()))


def cmd_simulate(args) -> None:
    matrix = _load_matrix(args.graph).astype(float)
    basis = SegmentBasis.from_segments(parse_segments(read_text(args.segments), args.segments))
    basis.check(matrix.shape[0])
    mode = FixedTheta(args.theta) if args.theta is not None else InverseMassTheta(args.kappa, args.theta_max)
    config = SimulationConfig(args.steps, args.seed, mode, args.snapshot_every)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.replicas == 1:
        _run_replica(_SimJob(matrix, basis, config, out, None))
        return
    jobs = [_SimJob(matrix, basis, config, out, i) for i in range(args.replicas)]
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        list(pool.map(_run_replica, jobs))


# -- sample ----------------------------------------------------------------------


def cmd_sample(args) -> None:
    W = digraphon.StepDigraphon(_load_matrix(args.graphon))
    rng = stream(args.seed, "sample")
    H = digraphon.sample_weighted(W, args.k, rng)
    G = digraphon.realize(H, rng)
    write_text(args.out, format_matrix(G.adjacency))
    write_text(f"{args.out}.latent", format_vector(H.points))


# -- infer -----------------------------------------------------------------------


def _fmt_beta(beta) -> str:
    return " ".join(repr(float(b)) for b in np.atleast_1d(beta))


def _eta_matrix(eta, k: int) -> np.ndarray:
    return bayes.present_edge_matrix(eta, k, category=bayes.PRESENT)


def cmd_infer(args) -> None:
    G = _load_matrix(args.graph)
    n = G.shape[0]
    if args.K < 2:
        raise ValueError("inference needs at least two edge categories")
    alpha = args.alpha
    if alpha is None:
        alpha = bayes.alpha_for_expected_clusters(n, args.expected_clusters)
    hyper = bayes.Hyperparams(alpha, args.beta)
    rep = Report()
    rep.fields.update(mode=args.mode, n=str(n), K=str(args.K), alpha=repr(alpha),
                      beta=_fmt_beta(args.beta))
    if args.mode == "map":
        if args.clusters is None:
            raise ValueError("map mode needs --clusters")
        labels = parse_labels(read_text(args.clusters), args.clusters)
        if len(labels) != n:
            raise ValueError(f"label file has {len(labels)} entries, graph has {n} vertices")
        z = bayes.ClusterAssignment(tuple(labels))
        counts = bayes.count_blocks(G, z, args.K, include_within=args.include_within)
    else:
        rng = stream(args.seed, "gibbs")
        res = bayes.gibbs_clusters(G, hyper, args.K, args.iters, rng)
        z = res.best()
        counts = bayes.count_blocks(G, z, args.K, include_within=True)
        tail = res.log_marginal_trace[1 + res.burn_in:]
        rep.fields.update(iters=str(args.iters), seed=str(args.seed), burn_in=str(res.burn_in),
                          mean_log_marginal=repr(float(np.mean(tail))),
                          labels=" ".join(map(str, z.labels)))
    rep.fields["normalization"] = args.normalization
    beta_vec = hyper.beta_vector(args.K)
    eta = bayes.map_estimate(counts, beta_vec, args.normalization)
    rep.fields["k"] = str(z.k)
    rep.fields["log_marginal"] = repr(bayes.log_marginal(counts, beta_vec))
    rep.matrix = _eta_matrix(eta, z.k)
    text = rep.format()
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


# -- distance --------------------------------------------------------------------


def cmd_distance(args) -> None:
    a, b = _load_matrix(args.a).astype(float), _load_matrix(args.b).astype(float)
    if a.shape != b.shape:
        raise ValueError(f"size mismatch: {a.shape[0]} vs {b.shape[0]}")
    if args.metric == "cut":
        value = digraphon.cut_distance_labeled(a, b)
    elif args.metric == "l1":
        value = digraphon.d1_distance(a, b)
    else:
        value = digraphon.cut_distance_unlabeled(a, b)
    print(f"{value:.9f}")


# -- bench -----------------------------------------------------------------------


def cmd_bench(args) -> None:
    rows = bench.run_bench(args.sizes, ops=args.ops, reps=args.reps, seed=args.seed,
                           theta=args.theta, workload=args.workload, dense_max=args.dense_max)
    text = bench.format_csv(rows)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


# -- parser ----------------------------------------------------------------------


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="digraphon-evo", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="global seed (default 0)")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run evolution by duplication")
    s.add_argument("--graph", required=True, help="initial matrix file")
    s.add_argument("--segments", required=True, help="segment basis file")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--theta", type=float, help="fixed attachment weight in (0, 1)")
    s.add_argument("--kappa", type=float, default=1.0, help="theta = min(theta_max, kappa / mass)")
    s.add_argument("--theta-max", type=float, default=0.5)
    s.add_argument("--snapshot-every", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--replicas", type=_positive_int, default=1)
    s.add_argument("--workers", type=_positive_int, default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sample", help="draw a W-random digraph from a step digraphon")
    s.add_argument("--graphon", required=True)
    s.add_argument("--k", type=_positive_int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("infer", help="block-model inference")
    s.add_argument("--graph", required=True)
    s.add_argument("--mode", choices=("map", "gibbs"), required=True)
    s.add_argument("--alpha", type=float, help="CRP parameter in (0, 1); default from --expected-clusters")
    s.add_argument("--expected-clusters", type=float, default=2.0,
                   help="choose alpha so the prior mean number of clusters is this (default 2)")
    s.add_argument("--beta", type=float, default=1.0, help="symmetric Dirichlet concentration")
    s.add_argument("--K", type=_positive_int, default=2, help="edge categories")
    s.add_argument("--iters", type=_positive_int, default=200)
    s.add_argument("--clusters", help="labels file (map mode)")
    s.add_argument("--normalization", choices=("pair", "global", "literal"), default="pair")
    s.add_argument("--include-within", action="store_true",
                   help="count within-cluster pairs in map mode")
    s.add_argument("--out")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("distance", help="distance between two matrix files")
    s.add_argument("--metric", choices=("cut", "l1", "cut-unlabeled"), required=True)
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("bench", help="time preferential attachment")
    s.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    s.add_argument("--ops", type=_positive_int, default=50)
    s.add_argument("--reps", type=_positive_int, default=5)
    s.add_argument("--theta", type=float, default=0.1)
    s.add_argument("--workload", choices=tuple(bench.BASES), default="overlap")
    s.add_argument("--dense-max", type=int, default=4096)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (FormatError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
