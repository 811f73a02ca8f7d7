"""
Tests for the condenser families and their verifiers.
"""

import numpy as np
import pytest

from src.condenser import (
    CertifiedRandomCondenser, GuvCondenser, GuvParams, LeftoverHashCondenser,
    build_recovery_condenser, certified_random_family, guv_eval, guv_params, guv_sizes,
    lhl_eval, matrix, verify_expansion, verify_universality,
)
from src.config import CondenserConfig
from src.errors import BudgetExceededError, DimensionMismatchError, UnsupportedParametersError
from src.field import FieldElem, Poly
from src.gf2 import BitVec, F2Matrix, mat_vec_mul


@pytest.fixture(scope="module")
def guv_small():
    return GuvCondenser(guv_params(1.0, 4, 2, 0.5))


@pytest.fixture
def families(small_family, guv_small):
    return [small_family, LeftoverHashCondenser(6, 4), guv_small]


class TestLinearity:

    def test_basis_pairs(self, families):
        for cond in families:
            for t in (0, 1, cond.D - 1):
                for i in range(cond.n):
                    for j in range(cond.n):
                        x, y = BitVec(cond.n, 1 << i), BitVec(cond.n, 1 << j)
                        assert cond.eval(x ^ y, t) == cond.eval(x, t) ^ cond.eval(y, t)

    def test_random_triples(self, families, rng):
        for cond in families:
            for _ in range(1000 // len(families)):
                a, b = (BitVec(cond.n, int(v)) for v in rng.integers(0, 1 << cond.n, size=2))
                t = int(rng.integers(0, cond.D))
                assert cond.eval(a ^ b, t) == cond.eval(a, t) ^ cond.eval(b, t)

    def test_zero_maps_to_zero(self, families):
        for cond in families:
            assert cond.eval(BitVec(cond.n, 0), 0).value == 0


class TestMatrix:

    def test_lhl_beta_one_is_identity(self):
        assert matrix(LeftoverHashCondenser(5, 5), 1) == F2Matrix.identity(5)

    def test_columns_are_basis_images(self, families):
        for cond in families:
            M = matrix(cond, 1)
            for j in range(cond.n):
                assert M.column(j) == cond.eval(BitVec(cond.n, 1 << j), 1)

    def test_spot_check_products(self, families, rng):
        for cond in families:
            for _ in range(100):
                x = BitVec(cond.n, int(rng.integers(0, 1 << cond.n)))
                t = int(rng.integers(0, cond.D))
                assert mat_vec_mul(matrix(cond, t), x) == cond.eval(x, t)

    def test_hash_indices_match_eval(self, families):
        xs = np.arange(1 << 4, dtype=np.uint64)
        for cond in families:
            if cond.n != 4:
                continue
            expected = [cond.eval(BitVec(4, int(x)), 3).value for x in xs]
            assert cond.hash_indices(xs, 3).tolist() == expected

    def test_seed_out_of_range(self, small_family):
        with pytest.raises(DimensionMismatchError):
            matrix(small_family, small_family.D)


class TestLeftoverHash:

    def test_gf4_example(self):
        out = lhl_eval(2, 1, BitVec(2, 0b10), FieldElem(2, 0b10))
        assert out == BitVec(1, 1)

    def test_identity_and_zero(self):
        x = BitVec(6, 0b101101)
        assert lhl_eval(6, 6, x, FieldElem(6, 1)) == x
        assert lhl_eval(6, 3, BitVec(6, 0), FieldElem(6, 9)).value == 0

    def test_min_entropy_condition_enforced(self):
        with pytest.raises(UnsupportedParametersError):
            LeftoverHashCondenser(8, 5, kappa=4, eps=0.25)
        cond = LeftoverHashCondenser(8, 8, kappa=4, eps=0.25)
        assert cond.D == 256

    def test_vectorized_hash_matches_eval(self, rng):
        cond = LeftoverHashCondenser(10, 6)
        xs = rng.integers(0, 1 << 10, size=64, dtype=np.uint64)
        for t in (0, 1, 777, 1023):
            expected = [lhl_eval(10, 6, BitVec(10, int(x)), FieldElem(10, t)).value for x in xs]
            assert cond.hash_indices(xs, t).tolist() == expected


class TestGuv:

    def test_sizes_examples(self):
        assert guv_sizes(1, 16, 4, 0.25) == (2048, 1, 2 ** 17)
        assert guv_sizes(1, 2, 1, 0.5) == (32, 1, 128)

    def test_error_bound_within_eps(self):
        for alpha, n, kappa, eps in [(1.0, 2, 1, 0.5), (1.0, 4, 2, 0.5), (2.0, 6, 3, 0.5)]:
            params = guv_params(alpha, n, kappa, eps)
            assert params.error_bound <= eps
            assert params.r_bits == params.ell * params.d
            assert params.g.degree == n

    def test_tiny_instance(self):
        params = GuvParams(alpha=1.0, n=2, kappa=1, eps=0.5, u=2, ell=1, q=4, d=2, r_bits=2,
                           g=Poly(2, (1, 1, 1)))
        for t in range(4):
            assert guv_eval(params, BitVec(2, 0b01), t) == BitVec(2, 1)
            assert guv_eval(params, BitVec(2, 0), t).value == 0

    def test_inconsistent_params_rejected(self):
        with pytest.raises(ValueError):
            GuvParams(alpha=1.0, n=2, kappa=1, eps=0.5, u=3, ell=1, q=4, d=2, r_bits=2,
                      g=Poly(2, (1, 1, 1)))

    def test_output_may_exceed_input(self, guv_small):
        assert guv_small.r > guv_small.n
        assert guv_small.D == guv_small.params.q

    def test_field_too_large(self):
        with pytest.raises(UnsupportedParametersError):
            guv_params(1.0, 64, 64, 0.01)


class TestVerifyExpansion:

    def test_singletons_always_pass(self, small_family):
        report = verify_expansion(small_family, 1, 0.01, mode="exhaustive")
        assert report.passed
        assert report.worst_ratio == 1.0
        assert report.sets_checked == 64

    def test_certified_family_rechecks(self, small_family):
        report = verify_expansion(small_family, 2, 0.25, mode="exhaustive")
        assert report.passed
        assert small_family.certificate.passed

    def test_k3_exhaustive_runs(self, small_family):
        report = verify_expansion(small_family, 3, 0.5, mode="exhaustive")
        assert report.sets_checked == 64 + 2016 + 41664

    def test_duplicated_seed_fails(self, rng):
        M = F2Matrix.random(rng, 3, 6)
        cond = CertifiedRandomCondenser(6, 3, [M, M])
        report = verify_expansion(cond, 2, 0.2, mode="exhaustive")
        assert not report.passed
        assert report.worst_ratio <= 0.75
        a, b = report.witness
        assert mat_vec_mul(M, BitVec(6, a)) == mat_vec_mul(M, BitVec(6, b))

    def test_collision_found_by_sampling(self):
        M = F2Matrix.from_rows([[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]])
        cond = CertifiedRandomCondenser(6, 2, [M, M])
        report = verify_expansion(cond, 2, 0.2, mode="sampled", trials=500, seed=1)
        assert not report.passed
        assert len(report.witness) == 2

    def test_exhaustive_budget(self, cond_10_4):
        with pytest.raises(BudgetExceededError):
            verify_expansion(cond_10_4, 4, 0.25, mode="exhaustive")


class TestVerifyUniversality:

    def test_n4_r2(self):
        report = verify_universality(LeftoverHashCondenser(4, 2))
        assert report.max_collision_prob == 0.25
        assert report.passed

    def test_full_output_is_uniform(self):
        report = verify_universality(LeftoverHashCondenser(6, 6))
        assert report.max_collision_prob == 2.0 ** -6

    @pytest.mark.parametrize("n,r", [(5, 1), (7, 3), (8, 5)])
    def test_bound_holds(self, n, r):
        report = verify_universality(LeftoverHashCondenser(n, r))
        assert report.max_collision_prob <= 2.0 ** -r
        assert report.pairs == (1 << n) * ((1 << n) - 1) // 2

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            verify_universality(LeftoverHashCondenser(12, 4))


class TestCertifiedFamily:

    def test_exhaustive_example(self, small_family):
        assert small_family.D == 8
        assert (small_family.n, small_family.r) == (6, 4)
        assert small_family.certificate.mode == "exhaustive"

    def test_pigeonhole_rejected(self):
        with pytest.raises(UnsupportedParametersError):
            certified_random_family(6, 2, 1, 2, 0.25)

    def test_same_seed_same_matrices(self):
        a = certified_random_family(6, 4, 4, 1, 0.25, seed=3)
        b = certified_random_family(6, 4, 4, 1, 0.25, seed=3)
        assert a.matrices == b.matrices

    def test_recovery_condenser_sizes(self, cond_8_2, cond_10_4):
        assert (cond_8_2.n, cond_8_2.r, cond_8_2.D) == (8, 6, 8)
        assert (cond_10_4.n, cond_10_4.r, cond_10_4.D) == (10, 7, 8)
        assert cond_10_4.certificate.k_max == 16

    def test_explicit_r(self):
        cond = build_recovery_condenser(7, 1, CondenserConfig(r=5, D=4, seed=2))
        assert cond.r == 5 and cond.D == 4

    def test_lhl_recovery_condenser(self, lhl_8_2):
        assert isinstance(lhl_8_2, LeftoverHashCondenser)
        assert lhl_8_2.r == 6 and lhl_8_2.D == 256
        assert lhl_8_2.kappa == 3
