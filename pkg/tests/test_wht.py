"""
Tests for the Walsh-Hadamard transform, spectral oracles and subspace sums.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import hadamard

from src.errors import DimensionMismatchError, PlanViolationError
from src.gf2 import F2Matrix, Subspace, complement_space, kernel_basis, orthogonal_complement
from src.wht import (
    DenseSignal, fwht, oracle_from_dense, oracle_from_signal, subspace_sums,
)


def _random_decomposition(rng, n, r):
    """(W, V-perp) from the kernel V of a random r x n matrix."""
    M = F2Matrix.random(rng, r, n)
    V = kernel_basis(M)
    return complement_space(V), orthogonal_complement(V), V


def _brute_force_sums(values, W, V):
    members = V.elements()
    return np.array([values[(members ^ a).astype(np.int64)].sum() for a in W.elements()])


class TestFwht:

    def test_two_points(self):
        out = fwht(DenseSignal(1, np.array([3.0, 1.0])))
        assert_allclose(out.values, [4 / np.sqrt(2), 2 / np.sqrt(2)])

    def test_delta_is_flat(self):
        x = np.zeros(16)
        x[0] = 1
        assert_allclose(fwht(DenseSignal(4, x)).values, np.full(16, 0.25))

    def test_matches_hadamard_matrix(self, rng):
        x = rng.normal(size=64)
        expected = hadamard(64) @ x / 8
        assert_allclose(fwht(DenseSignal(6, x)).values, expected, atol=1e-12)

    def test_involution_and_parseval(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 17))
            x = DenseSignal(n, rng.normal(size=1 << n))
            xhat = fwht(x)
            assert_allclose(fwht(xhat).values, x.values, rtol=1e-9, atol=1e-9)
            assert np.linalg.norm(xhat.values) == pytest.approx(np.linalg.norm(x.values), rel=1e-9)

    def test_unnormalized_integer(self):
        x = DenseSignal(3, np.array([1, 0, 0, 2, 0, 0, 0, -1]))
        out = fwht(x, normalized=False)
        assert out.values.dtype == np.int64
        assert out.values.tolist() == (hadamard(8) @ x.values).tolist()

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            DenseSignal(3, np.zeros(7))


class TestOracle:

    def test_query_returns_entry(self, rng):
        xhat = DenseSignal(5, rng.normal(size=32))
        oracle = oracle_from_dense(xhat)
        assert oracle.query(17) == xhat.values[17]

    def test_repeats_counted(self):
        oracle = oracle_from_dense(DenseSignal(3, np.arange(8.0)))
        oracle.query(2)
        oracle.query(2)
        assert oracle.query_count == 2
        assert oracle.queried_positions().tolist() == [2, 2]

    def test_armed_plan_rejects_others(self):
        oracle = oracle_from_dense(DenseSignal(3, np.arange(8.0)))
        oracle.arm(np.array([0, 5], dtype=np.uint64))
        assert oracle.query(5) == 5.0
        with pytest.raises(PlanViolationError):
            oracle.query(4)
        oracle.disarm()
        assert oracle.query(4) == 4.0

    def test_integer_oracle_serves_scaled_spectrum(self, rng):
        x = DenseSignal(6, rng.integers(-5, 6, size=64))
        oracle = oracle_from_signal(x, integer=True)
        expected = np.rint(fwht(x).values * 8).astype(np.int64)
        assert oracle.query_many(np.arange(64, dtype=np.uint64)).tolist() == expected.tolist()

    def test_integer_mode_needs_integer_signal(self):
        with pytest.raises(ValueError):
            oracle_from_signal(DenseSignal(1, np.array([0.5, 1.0])), integer=True)

    def test_out_of_range(self):
        oracle = oracle_from_dense(DenseSignal(3, np.zeros(8)))
        with pytest.raises(DimensionMismatchError):
            oracle.query(8)


class TestSubspaceSums:

    def test_r_zero_is_total_sum(self, rng):
        values = rng.integers(-9, 10, size=256)
        oracle = oracle_from_signal(DenseSignal(8, values))
        out = subspace_sums(oracle, Subspace.zero(8), Subspace.zero(8))
        assert out.tolist() == [values.sum()]
        assert oracle.query_count == 1

    def test_r_zero_float_mode(self, rng):
        values = rng.normal(size=64)
        oracle = oracle_from_signal(DenseSignal(6, values), integer=False)
        out = subspace_sums(oracle, Subspace.zero(6), Subspace.zero(6))
        assert out[0] == pytest.approx(values.sum())

    def test_r_n_is_inverse_transform(self, rng):
        values = rng.integers(-9, 10, size=64)
        oracle = oracle_from_signal(DenseSignal(6, values))
        out = subspace_sums(oracle, Subspace.full(6), Subspace.full(6))
        assert out.tolist() == values.tolist()
        assert oracle.query_count == 64

    def test_matches_brute_force(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 13))
            r = int(rng.integers(0, n + 1))
            values = rng.integers(-20, 21, size=1 << n)
            W, Vperp, V = _random_decomposition(rng, n, r)
            oracle = oracle_from_signal(DenseSignal(n, values))
            out = subspace_sums(oracle, W, Vperp)
            assert oracle.query_count == 1 << Vperp.dim
            assert out.tolist() == _brute_force_sums(values, W, V).tolist()

    def test_float_mode_matches_brute_force(self, rng):
        values = rng.normal(size=1 << 9)
        W, Vperp, V = _random_decomposition(rng, 9, 4)
        oracle = oracle_from_signal(DenseSignal(9, values), integer=False)
        assert_allclose(subspace_sums(oracle, W, Vperp), _brute_force_sums(values, W, V),
                        atol=1e-9)

    def test_queries_only_the_dual(self, rng):
        W, Vperp, _ = _random_decomposition(rng, 8, 3)
        oracle = oracle_from_signal(DenseSignal(8, rng.integers(-3, 4, size=256)))
        oracle.arm(Vperp.elements())
        subspace_sums(oracle, W, Vperp)
        assert sorted(oracle.queried_positions().tolist()) == sorted(Vperp.elements().tolist())

    def test_dimension_mismatch(self):
        oracle = oracle_from_signal(DenseSignal(4, np.zeros(16, dtype=np.int64)))
        with pytest.raises(DimensionMismatchError):
            subspace_sums(oracle, Subspace.full(4), Subspace.zero(4))
