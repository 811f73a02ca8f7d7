"""
Tests for the scaling sweeps.
"""

import pytest

from src.bench import bench_point, run_bench


class TestBench:

    def test_point_counts(self):
        row = bench_point(8, 2, 8, trials=2, seed=1)
        assert row['queries_match_plan']
        assert row['queries'] <= row['plan_bound']
        assert row['exact']
        assert row['seeds'] == 8

    def test_sweep_rows(self):
        table = run_bench("D", 4, 8, step=4, n=8, k=2, trials=1)
        assert table['D'].tolist() == [4, 8]
        assert list(table.columns[:4]) == ['n', 'k', 'D', 'r']

    def test_bad_sweep(self):
        with pytest.raises(ValueError):
            run_bench("r", 1, 2)
        with pytest.raises(ValueError):
            run_bench("n", 5, 4)


@pytest.mark.slow
def test_queries_below_length_at_14():
    row = bench_point(14, 4, 8, trials=1, seed=0)
    assert row['below_N']
    assert row['queries_match_plan']
