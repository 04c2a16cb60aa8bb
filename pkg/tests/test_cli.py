import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from digraphon_evo.cli import main, stream
from digraphon_evo.evolution import InverseMassTheta, SegmentBasis, select_segment, theta_weight
from digraphon_evo.formats import format_matrix, parse_matrix, parse_report, parse_segments

from .oracles import brute_cut_norm, dense_attach

DATA = Path(__file__).resolve().parent.parent / "data"


def run(*argv):
    assert main([str(a) for a in argv]) == 0


def test_streams_are_independent_and_stable():
    a = stream(1, "simulate").random(3)
    assert (a == stream(1, "simulate").random(3)).all()
    assert not (a == stream(1, "sample").random(3)).any()
    assert not (stream(1, "simulate", 0).random(3) == stream(1, "simulate", 1).random(3)).any()


def test_simulate_zero_steps(tmp_path):
    run("simulate", "--graph", DATA / "demo_8x8.mat", "--segments", DATA / "overlap_segments_8.txt",
        "--steps", 0, "--out-dir", tmp_path)
    assert (tmp_path / "trajectory.csv").read_text() == "step,segment,theta,segment_mass,total_mass\n"


def test_simulate_matches_dense_replay(tmp_path):
    run("--seed", 5, "simulate", "--graph", DATA / "demo_8x8.mat", "--segments", DATA / "overlap_segments_8.txt",
        "--steps", 100, "--snapshot-every", 25, "--out-dir", tmp_path)
    m = parse_matrix((DATA / "demo_8x8.mat").read_text()).astype(float)
    basis = SegmentBasis.from_segments(parse_segments((DATA / "overlap_segments_8.txt").read_text()))
    rng = stream(5, "simulate")
    for _ in range(100):
        X = basis.segments[select_segment(basis, rng)]
        m = dense_attach(m, X, theta_weight(m[X.slices()].sum(), InverseMassTheta()))
    final = parse_matrix((tmp_path / "final.mat").read_text())
    np.testing.assert_allclose(final, m, rtol=1e-8)
    assert (tmp_path / "snap_100.mat").read_text() == (tmp_path / "final.mat").read_text()
    assert len((tmp_path / "trajectory.csv").read_text().splitlines()) == 101


def test_simulate_replicas(tmp_path):
    run("simulate", "--graph", DATA / "demo_8x8.mat", "--segments", DATA / "overlap_segments_8.txt",
        "--steps", 20, "--out-dir", tmp_path, "--replicas", 2, "--theta", 0.2)
    a = (tmp_path / "trajectory_r0.csv").read_text()
    b = (tmp_path / "trajectory_r1.csv").read_text()
    assert a != b and (tmp_path / "final_r1.mat").exists()


def write_matrix(path, m):
    path.write_text(format_matrix(np.asarray(m)))
    return path


@pytest.mark.parametrize("p,expect", [(0.0, lambda k: np.zeros((k, k))), (1.0, lambda k: 1 - np.eye(k))])
def test_sample_constant(tmp_path, p, expect):
    g = write_matrix(tmp_path / "w.mat", np.full((3, 3), p))
    run("sample", "--graphon", g, "--k", 6, "--out", tmp_path / "s.mat")
    assert (parse_matrix((tmp_path / "s.mat").read_text()) == expect(6)).all()
    assert len((tmp_path / "s.mat.latent").read_text().split()) == 6


def test_sample_half_density(tmp_path):
    g = write_matrix(tmp_path / "w.mat", np.full((2, 2), 0.5))
    run("--seed", 2, "sample", "--graphon", g, "--k", 64, "--out", tmp_path / "s.mat")
    A = parse_matrix((tmp_path / "s.mat").read_text())
    pairs = 64 * 63
    assert abs(A.sum() - pairs / 2) <= 3 * np.sqrt(pairs / 4)


def test_sample_rejects_bad_graphon(tmp_path, capsys):
    g = write_matrix(tmp_path / "w.mat", np.full((2, 2), 1.5))
    assert main(["sample", "--graphon", str(g), "--k", "3", "--out", str(tmp_path / "s.mat")]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_infer_map_matches_formula(tmp_path):
    out = tmp_path / "r.txt"
    run("infer", "--graph", DATA / "planted_30.mat", "--mode", "map", "--clusters", DATA / "planted_30.labels",
        "--beta", 0.5, "--out", out)
    rep = parse_report(out.read_text())
    A = parse_matrix((DATA / "planted_30.mat").read_text())
    present = A[:15, 15:].sum()
    assert rep.matrix[0, 1] == pytest.approx((present + 0.5) / (225 + 1.0))
    assert np.isnan(rep.matrix[0, 0])


def test_infer_all_zero_graph_is_uniform(tmp_path):
    g = write_matrix(tmp_path / "g.mat", np.zeros((4, 4), dtype=int))
    lab = tmp_path / "l.txt"
    lab.write_text("1\n1\n2\n2\n")
    out = tmp_path / "r.txt"
    run("infer", "--graph", g, "--mode", "map", "--clusters", lab, "--beta", 3.0, "--out", out)
    m = parse_report(out.read_text()).matrix
    # no present edges: (0 + beta) / (2 beta + 4)
    assert m[0, 1] == pytest.approx(3.0 / 10.0)


def test_infer_label_mismatch(tmp_path):
    lab = tmp_path / "l.txt"
    lab.write_text("1\n2\n")
    assert main(["infer", "--graph", str(DATA / "planted_30.mat"), "--mode", "map", "--clusters", str(lab)]) == 1


def test_infer_gibbs_recovers_planted(tmp_path):
    out = tmp_path / "r.txt"
    run("--seed", 4, "infer", "--graph", DATA / "planted_30.mat", "--mode", "gibbs", "--iters", 100, "--out", out)
    rep = parse_report(out.read_text())
    labels = tuple(int(x) for x in rep.fields["labels"].split())
    planted = tuple(int(x) for x in (DATA / "planted_30.labels").read_text().split())
    assert labels == planted


def test_distance(tmp_path, capsys):
    rng = np.random.default_rng(8)
    a = write_matrix(tmp_path / "a.mat", (rng.random((3, 3)) < 0.5).astype(int))
    b = write_matrix(tmp_path / "b.mat", (rng.random((3, 3)) < 0.5).astype(int))
    values = {}
    for metric in ("cut", "l1", "cut-unlabeled"):
        run("distance", "--metric", metric, a, a)
        assert capsys.readouterr().out == "0.000000000\n"
        run("distance", "--metric", metric, a, b)
        values[metric] = float(capsys.readouterr().out)
    A = parse_matrix(a.read_text()).astype(float)
    B = parse_matrix(b.read_text()).astype(float)
    assert values["cut"] == pytest.approx(brute_cut_norm(A - B), abs=1e-9)
    assert values["cut"] <= values["l1"]
    assert values["cut-unlabeled"] <= values["cut"]


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit):
        main(["simulate", "--bogus"])


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "digraphon_evo.cli", "distance", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "--metric" in out.stdout
