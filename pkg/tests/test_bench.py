import numpy as np
import pytest

from digraphon_evo.bench import BenchRow, dense_attach, overlap_basis, format_csv, full_row_basis, run_bench
from digraphon_evo.grid_store import Segment

from .oracles import dense_attach as literal_attach


@pytest.mark.parametrize("n", [64, 100, 1000])
def test_bases_fit(n):
    for basis in (overlap_basis(n), full_row_basis(n)):
        basis.check(n)
        assert len(basis) in (2, 4)


def test_dense_baseline_matches_formula():
    rng = np.random.default_rng(0)
    G = rng.random((9, 9))
    X = Segment(2, 5, 3, 9)
    expect = literal_attach(G.copy(), X, 0.3)
    dense_attach(G, X, 0.3)
    np.testing.assert_allclose(G, expect, rtol=1e-12)


def test_run_bench_columns():
    rows = run_bench([64, 128], ops=5, reps=1, dense_max=64)
    text = format_csv(rows)
    lines = text.splitlines()
    assert lines[0] == BenchRow.CSV_HEADER
    assert lines[1].split(",")[2] != "" and lines[2].split(",")[2] == ""
    with pytest.raises(ValueError):
        run_bench([32])


def test_visits_deterministic():
    a = run_bench([256], ops=10, reps=1, seed=4)
    b = run_bench([256], ops=10, reps=1, seed=4)
    assert a[0].visits == b[0].visits


@pytest.mark.slow
def test_structure_beats_dense_on_full_rows():
    row = run_bench([4096], ops=10, reps=5, workload="full-rows")[0]
    assert row.structure_ns < row.dense_ns
