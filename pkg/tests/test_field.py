"""
Tests for GF(2^m) arithmetic and polynomials over GF(2^m).
"""

import numpy as np
import pytest

from src.errors import DimensionMismatchError
from src.field import (
    FieldElem, Poly, _binary_irreducible, _fmul, find_irreducible, gf_mul, gf_mul_array,
    is_irreducible, modulus, poly_divmod, poly_eval, poly_gcd, poly_mod_pow,
)


def _random_poly(rng, base_m, degree):
    coeffs = rng.integers(0, 1 << base_m, size=degree + 1).tolist()
    coeffs[-1] = max(1, coeffs[-1])
    return Poly(base_m, tuple(int(c) for c in coeffs))


class TestModulus:

    def test_small_degrees(self):
        assert modulus(1) == 0b11
        assert modulus(2) == 0b111
        assert modulus(3) == 0b1011
        assert modulus(4) == 0b10011

    @pytest.mark.parametrize("m", [5, 8, 13, 16, 31, 64])
    def test_irreducible_of_right_degree(self, m):
        f = modulus(m)
        assert f.bit_length() == m + 1
        assert _binary_irreducible(f)


class TestGfMul:

    def test_identity_and_zero(self):
        a = FieldElem(5, 0b10110)
        assert gf_mul(a, FieldElem(5, 1)) == a
        assert gf_mul(a, FieldElem(5, 0)) == FieldElem(5, 0)

    def test_gf4_x_times_x(self):
        x = FieldElem(2, 0b10)
        assert gf_mul(x, x) == FieldElem(2, 0b11)

    def test_field_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            gf_mul(FieldElem(3, 1), FieldElem(4, 1))

    def test_inverses(self):
        for value in range(1, 16):
            a = FieldElem(4, value)
            assert a * a.inverse() == FieldElem(4, 1)

    @pytest.mark.parametrize("m", [2, 3, 4, 8])
    def test_associative_and_commutative(self, rng, m):
        for a, b, c in rng.integers(0, 1 << m, size=(1000, 3)):
            a, b, c = FieldElem(m, int(a)), FieldElem(m, int(b)), FieldElem(m, int(c))
            assert (a * b) * c == a * (b * c)
            assert a * b == b * a

    @pytest.mark.parametrize("m", range(1, 9))
    def test_fermat_inverse_exhaustive(self, m):
        one = FieldElem(m, 1)
        for value in range(1, 1 << m):
            a = FieldElem(m, value)
            assert a * a ** ((1 << m) - 2) == one

    def test_distributive(self, rng):
        for _ in range(200):
            a, b, c = (FieldElem(9, int(v)) for v in rng.integers(0, 512, size=3))
            assert a * (b + c) == a * b + a * c

    def test_vectorized_product(self, rng):
        values = rng.integers(0, 1 << 12, size=300, dtype=np.uint64)
        for beta in (0, 1, 0x5a3, 0xfff):
            expected = [_fmul(int(v), beta, 12) for v in values]
            assert gf_mul_array(values, beta, 12).tolist() == expected


class TestPoly:

    def test_trimmed(self):
        assert Poly(2, (1, 0, 0)).coeffs == (1,)
        assert Poly(2, (0, 0)).is_zero()

    def test_frobenius_square(self, rng):
        for _ in range(20):
            F = _random_poly(rng, 3, 5)
            assert F.square() == F * F

    def test_divmod_identity(self, rng):
        for _ in range(20):
            f = _random_poly(rng, 4, 9)
            g = _random_poly(rng, 4, 3)
            quot, rem = poly_divmod(f, g)
            assert quot * g + rem == f
            assert rem.degree < g.degree

    def test_gcd_is_monic_common_factor(self, rng):
        a, b, c = (_random_poly(rng, 3, d) for d in (2, 3, 2))
        g = poly_gcd(a * c, b * c)
        assert g.coeffs[-1] == 1
        assert poly_divmod(a * c, g)[1].is_zero()
        assert poly_divmod(b * c, g)[1].is_zero()
        assert poly_divmod(g, c)[1].is_zero()


class TestPolyModPow:

    def test_exponent_one(self, rng):
        g = find_irreducible(3, 2)
        F = _random_poly(rng, 2, 5)
        assert poly_mod_pow(F, 1, g) == F % g

    def test_constant(self):
        g = find_irreducible(3, 4)
        c = FieldElem(4, 0b1011)
        assert poly_mod_pow(Poly.constant(c), 7, g) == Poly.constant(c ** 7)

    def test_hand_example(self):
        g = Poly(1, (1, 1, 1))
        assert poly_mod_pow(Poly.x(1), 2, g) == Poly(1, (1, 1))

    def test_matches_repeated_multiplication(self, rng):
        g = find_irreducible(4, 3)
        F = _random_poly(rng, 3, 6)
        expected = Poly(3, (1,))
        for _ in range(13):
            expected = (expected * F) % g
        assert poly_mod_pow(F, 13, g) == expected

    def test_exponents_add(self, rng):
        g = find_irreducible(4, 3)
        F = _random_poly(rng, 3, 6)
        for a, b in [(0, 5), (3, 4), (17, 29), (100, 255)]:
            expected = (poly_mod_pow(F, a, g) * poly_mod_pow(F, b, g)) % g
            assert poly_mod_pow(F, a + b, g) == expected

    def test_huge_exponent_is_frobenius_power(self, rng):
        # raising to a power of 2 is additive in characteristic 2
        g = find_irreducible(5, 8)
        F, G = _random_poly(rng, 8, 4), _random_poly(rng, 8, 4)
        e = 256 ** 3
        assert poly_mod_pow(F + G, e, g) == poly_mod_pow(F, e, g) + poly_mod_pow(G, e, g)


class TestPolyEval:

    def test_constant(self):
        c = FieldElem(3, 5)
        assert poly_eval(Poly.constant(c), FieldElem(3, 6)) == c

    def test_identity_poly(self):
        z = FieldElem(6, 0b101101)
        assert poly_eval(Poly.x(6), z) == z

    def test_gf4_square(self):
        assert poly_eval(Poly(2, (0, 0, 1)), FieldElem(2, 0b10)) == FieldElem(2, 0b11)

    def test_additive_in_poly(self, rng):
        F, G = _random_poly(rng, 5, 6), _random_poly(rng, 5, 4)
        for value in range(32):
            z = FieldElem(5, value)
            assert poly_eval(F + G, z) == poly_eval(F, z) + poly_eval(G, z)


class TestFindIrreducible:

    def test_binary_quadratic_and_cubic(self):
        assert find_irreducible(2, 1).coeffs == (1, 1, 1)
        assert find_irreducible(3, 1).coeffs == (1, 1, 0, 1)

    def test_reducible_rejected(self):
        assert not is_irreducible(Poly(1, (1, 0, 1)))
        assert not is_irreducible(Poly(2, (0, 1, 1)))

    def test_degree_one(self):
        assert find_irreducible(1, 5).degree == 1

    @pytest.mark.parametrize("m,q_degree", [(2, 2), (3, 2), (2, 4), (4, 3)])
    def test_no_roots_and_monic(self, m, q_degree):
        f = find_irreducible(m, q_degree)
        assert f.degree == m
        assert f.coeffs[-1] == 1
        assert is_irreducible(f)
        if m <= 3:
            # degree <= 3 is irreducible iff it has no root
            for value in range(1 << q_degree):
                assert poly_eval(f, FieldElem(q_degree, value)).value != 0

    def test_deterministic(self):
        assert find_irreducible(6, 3) == find_irreducible(6, 3)
