"""
Tests for the l1 metrics, the guarantee check and the run reports.
"""

import json

import numpy as np
import pytest

from src.config import CondenserConfig, RecoveryConfig
from src.evaluate import (
    RecoveryReport, RunReport, build_report, calculate_metrics, check_guarantee,
    decay_violations, l1_error, rip1_ratio, save_report, tail_l1,
)
from src.recover import end_to_end
from src.signals import generate_signal
from src.sketch import SparseVec
from src.wht import oracle_from_signal


class TestMetrics:

    def test_tail(self):
        assert tail_l1(np.array([5, -3, 1, 0]), 1) == 4.0
        assert tail_l1(np.array([5, -3, 1, 0]), 4) == 0.0

    def test_l1_error_mixed_inputs(self):
        x = generate_signal(4, 2, seed=1)
        assert l1_error(SparseVec.from_dense(x.values), x) == 0.0
        assert l1_error(np.zeros(16), x) == np.abs(x.values).sum()

    @pytest.mark.parametrize("error,tail,expected", [
        (0, 0, True), (1, 0, False), (56, 1, True), (57, 1, False),
    ])
    def test_check_guarantee(self, error, tail, expected):
        assert check_guarantee(error, tail, 1 / 16) is expected

    def test_floor_relaxes_exactness(self):
        assert check_guarantee(0.5, 0, 1 / 16, floor=1.0)

    def test_calculate_metrics(self):
        x = np.array([4, 0, -1, 0])
        metrics = calculate_metrics(np.array([4, 0, 0, 0]), x, 1, 0.25)
        assert metrics['l1_error'] == 1.0
        assert metrics['ratio'] == 1.0
        assert metrics['bound'] == 20.0
        assert metrics['within_guarantee'] and not metrics['exact']


class TestDecay:

    def test_halving_history_is_clean(self):
        x = np.array([16, 0, 0, 0])
        history = [SparseVec.from_dense(np.array(v)) for v in ([0, 0, 0, 0], [8, 0, 0, 0],
                                                                 [12, 0, 0, 0], [16, 0, 0, 0])]
        assert decay_violations(history, x, 1, 0.25) == []

    def test_stall_is_reported(self):
        x = np.array([16, 1, 0, 0])
        history = [SparseVec.from_dense(np.array(v)) for v in ([0, 0, 0, 0], [2, 0, 0, 0])]
        assert decay_violations(history, x, 1, 0.25) == [(0, 17.0, 15.0)]


class TestRip1:

    def test_ratio_bounds(self, small_family, rng):
        for _ in range(20):
            indices = rng.choice(64, size=2, replace=False)
            w = SparseVec.from_arrays(6, indices, rng.integers(1, 5, size=2) * rng.choice([-1, 1], 2))
            ratio = rip1_ratio(small_family, w)
            assert 1 - 2 * 0.25 <= ratio <= 1.0

    @pytest.mark.parametrize("fixture,k", [("cond_8_2", 2), ("cond_10_4", 4)])
    def test_recovery_condensers_at_4k(self, request, rng, fixture, k):
        cond = request.getfixturevalue(fixture)
        size = 4 * k
        lower = 1 - 2 * CondenserConfig().cert_eps
        for _ in range(500):
            indices = rng.choice(1 << cond.n, size=size, replace=False)
            values = rng.integers(1, 21, size=size) * rng.choice([-1, 1], size)
            ratio = rip1_ratio(cond, SparseVec.from_arrays(cond.n, indices, values))
            assert lower <= ratio <= 1.0 + 1e-12

    def test_singleton_is_isometric(self, small_family):
        assert rip1_ratio(small_family, SparseVec.from_pairs(6, [(9, -3)])) == 1.0


class TestReports:

    def test_report_fields(self, cond_8_2):
        x = generate_signal(8, 2, seed=3)
        config = RecoveryConfig(k=2, L=10)
        result = end_to_end(oracle_from_signal(x), cond_8_2, config)
        report = build_report(result, x, cond_8_2, config)
        assert list(report.model_dump()) == list(RecoveryReport.model_fields)
        assert report.exact and report.l1_error == 0.0
        assert report.ratio is None
        assert report.queries == result.queries

    def test_run_report_written_in_order(self, cond_8_2, tmp_path):
        x = generate_signal(8, 2, model="noisy", noise_l1=2, seed=3)
        config = RecoveryConfig(k=2, L=10)
        result = end_to_end(oracle_from_signal(x), cond_8_2, config)
        base = build_report(result, x, cond_8_2, config)
        report = RunReport(**base.model_dump(), command="recover --k 2",
                           config=config.model_dump())
        path = tmp_path / "out" / "report.json"
        save_report(report, path)
        loaded = json.loads(path.read_text())
        assert list(loaded)[:12] == list(RecoveryReport.model_fields)
        assert list(loaded)[12:] == ["command", "config"]
        assert loaded["l1_tail"] == 2.0
