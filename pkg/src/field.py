"""
Finite Field Arithmetic
=======================
GF(2^m) elements and polynomials over GF(2^m), used by the leftover-hash family
(multiplication by beta in GF(2^n)) and the GUV condenser (F^(u^i) mod g).
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np

from src.errors import DimensionMismatchError

logger = logging.getLogger(__name__)

MAX_DEGREE = 64


# =============================================================================
# BINARY POLYNOMIALS (ints, bit j = coefficient of x^j)
# =============================================================================

def _clmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _cmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _cgcd(a: int, b: int) -> int:
    while b:
        a, b = b, _cmod(a, b)
    return a


def _binary_irreducible(f: int) -> bool:
    """Ben-Or test over F2: gcd(x^(2^i) - x, f) = 1 for every i <= deg f / 2."""
    m = f.bit_length() - 1
    if m < 1:
        return False
    power = 0b10
    for _ in range(m // 2):
        power = _cmod(_clmul(power, power), f)
        if _cgcd(f, power ^ 0b10) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def modulus(m: int) -> int:
    """
    Fixed reduction polynomial for GF(2^m).

    The lexicographically-first irreducible trinomial x^m + x^a + 1 (smallest a),
    else the first pentanomial x^m + x^c + x^b + x^a + 1 in (a, b, c) order.
    GF(2) uses x + 1.
    """
    if not 1 <= m <= MAX_DEGREE:
        raise DimensionMismatchError(f"field degree {m} outside 1..{MAX_DEGREE}")
    if m == 1:
        return 0b11
    top = (1 << m) | 1
    for a in range(1, m):
        candidate = top | (1 << a)
        if _binary_irreducible(candidate):
            return candidate
    for a, b, c in itertools.combinations(range(1, m), 3):
        candidate = top | (1 << a) | (1 << b) | (1 << c)
        if _binary_irreducible(candidate):
            return candidate
    raise AssertionError(f"no trinomial or pentanomial for degree {m}")


# =============================================================================
# GF(2^m) ELEMENTS
# =============================================================================

def _fmul(a: int, b: int, m: int) -> int:
    """Shift-and-reduce product in GF(2^m)."""
    mod = modulus(m)
    top = 1 << m
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= mod
    return out


def _fsquare(a: int, m: int) -> int:
    return _fmul(a, a, m)


def _fpow(a: int, e: int, m: int) -> int:
    out = 1
    while e:
        if e & 1:
            out = _fmul(out, a, m)
        a = _fmul(a, a, m)
        e >>= 1
    return out


def _finv(a: int, m: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return _fpow(a, (1 << m) - 2, m)


def gf_mul_array(values: np.ndarray, beta: int, m: int) -> np.ndarray:
    """Multiply every uint64 element of ``values`` by the scalar beta in GF(2^m)."""
    mask = np.uint64((1 << m) - 1) if m < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    low = np.uint64(modulus(m) & ((1 << m) - 1))
    shift_top = np.uint64(m - 1)
    acc = np.asarray(values, dtype=np.uint64).copy()
    out = np.zeros_like(acc)
    while beta:
        if beta & 1:
            out ^= acc
        beta >>= 1
        if beta:
            carry = (acc >> shift_top) & np.uint64(1)
            acc = (acc << np.uint64(1)) & mask
            acc ^= carry * low
    return out


@dataclass(frozen=True)
class FieldElem:
    """Element of GF(2^m); bit j of ``value`` is the coefficient of x^j."""
    m: int
    value: int = 0

    def __post_init__(self):
        if not 1 <= self.m <= MAX_DEGREE:
            raise DimensionMismatchError(f"field degree {self.m} outside 1..{MAX_DEGREE}")
        if not 0 <= self.value < (1 << self.m):
            raise DimensionMismatchError(f"{self.value} is not an element of GF(2^{self.m})")

    def __add__(self, other: "FieldElem") -> "FieldElem":
        _same_field(self, other)
        return FieldElem(self.m, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: "FieldElem") -> "FieldElem":
        return gf_mul(self, other)

    def __pow__(self, e: int) -> "FieldElem":
        return FieldElem(self.m, _fpow(self.value, e, self.m))

    def inverse(self) -> "FieldElem":
        return FieldElem(self.m, _finv(self.value, self.m))

    def bits(self) -> Tuple[int, ...]:
        return tuple((self.value >> j) & 1 for j in range(self.m))


def _same_field(a: FieldElem, b: FieldElem):
    if a.m != b.m:
        raise DimensionMismatchError(f"GF(2^{a.m}) and GF(2^{b.m}) elements do not mix")


def gf_mul(a: FieldElem, b: FieldElem) -> FieldElem:
    """
    Product in GF(2^m) under the fixed modulus for m.

    Args:
        a: left factor
        b: right factor, same m

    Returns:
        a * b
    """
    _same_field(a, b)
    return FieldElem(a.m, _fmul(a.value, b.value, a.m))


# =============================================================================
# POLYNOMIALS OVER GF(2^m)
# =============================================================================

def _trim(coeffs: Iterable[int]) -> Tuple[int, ...]:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class Poly:
    """
    Polynomial over GF(2^base_m), coefficients low degree first.

    Coefficients are stored as the int values of the field elements and trimmed
    so the leading coefficient is nonzero; the zero polynomial has no coefficients.
    """
    base_m: int
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        if not 1 <= self.base_m <= MAX_DEGREE:
            raise DimensionMismatchError(f"base degree {self.base_m} outside 1..{MAX_DEGREE}")
        limit = 1 << self.base_m
        for c in self.coeffs:
            if not 0 <= c < limit:
                raise DimensionMismatchError(f"coefficient {c} outside GF(2^{self.base_m})")
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def constant(cls, c: FieldElem) -> "Poly":
        return cls(c.m, (c.value,))

    @classmethod
    def x(cls, base_m: int) -> "Poly":
        return cls(base_m, (0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, j: int) -> FieldElem:
        value = self.coeffs[j] if 0 <= j < len(self.coeffs) else 0
        return FieldElem(self.base_m, value)

    def __add__(self, other: "Poly") -> "Poly":
        _same_base(self, other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (size - len(self.coeffs))
        b = other.coeffs + (0,) * (size - len(other.coeffs))
        return Poly(self.base_m, tuple(x ^ y for x, y in zip(a, b)))

    __sub__ = __add__

    def __mul__(self, other: "Poly") -> "Poly":
        _same_base(self, other)
        if self.is_zero() or other.is_zero():
            return Poly(self.base_m)
        m = self.base_m
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] ^= _fmul(a, b, m)
        return Poly(m, tuple(out))

    def __mod__(self, g: "Poly") -> "Poly":
        return poly_divmod(self, g)[1]

    def square(self) -> "Poly":
        """Frobenius squaring: coefficient-wise square, exponents doubled."""
        out = [0] * max(0, 2 * len(self.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            out[2 * i] = _fsquare(a, self.base_m)
        return Poly(self.base_m, tuple(out))

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        inv = _finv(self.coeffs[-1], self.base_m)
        return Poly(self.base_m, tuple(_fmul(c, inv, self.base_m) for c in self.coeffs))


def _same_base(a: Poly, b: Poly):
    if a.base_m != b.base_m:
        raise DimensionMismatchError(
            f"polynomials over GF(2^{a.base_m}) and GF(2^{b.base_m}) do not mix")


def poly_divmod(f: Poly, g: Poly) -> Tuple[Poly, Poly]:
    """Long division f = quot * g + rem with deg rem < deg g."""
    _same_base(f, g)
    if g.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    m = f.base_m
    rem = list(f.coeffs)
    dg = g.degree
    inv_lead = _finv(g.coeffs[-1], m)
    quot = [0] * max(0, len(rem) - dg)
    for shift in range(len(rem) - 1 - dg, -1, -1):
        lead = rem[shift + dg]
        if lead == 0:
            continue
        factor = _fmul(lead, inv_lead, m)
        quot[shift] = factor
        for j, c in enumerate(g.coeffs):
            if c:
                rem[shift + j] ^= _fmul(factor, c, m)
    return Poly(m, tuple(quot)), Poly(m, tuple(rem[:dg]))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd."""
    while not b.is_zero():
        a, b = b, poly_divmod(a, b)[1]
    return a.monic()


def poly_mod_pow(F: Poly, e: int, g: Poly) -> Poly:
    """
    F^e mod g by square-and-multiply.

    Exponents are Python ints of any bit length; squarings use the Frobenius
    shortcut before reducing mod g.

    Args:
        F: base polynomial
        e: non-negative exponent
        g: modulus with deg g >= 1

    Returns:
        Remainder of F^e modulo g, degree < deg g
    """
    _same_base(F, g)
    if g.is_zero():
        raise ZeroDivisionError("zero modulus")
    if g.degree < 1:
        raise DimensionMismatchError("modulus must have degree >= 1")
    if e < 0:
        raise ValueError("negative exponent")
    result = Poly(F.base_m, (1,)) % g
    base = F % g
    for bit in bin(e)[2:]:
        result = result.square() % g
        if bit == "1":
            result = (result * base) % g
    return result


def poly_eval(F: Poly, z: FieldElem) -> FieldElem:
    """Horner evaluation of F at z."""
    if F.base_m != z.m:
        raise DimensionMismatchError(
            f"polynomial over GF(2^{F.base_m}) evaluated at a GF(2^{z.m}) point")
    acc = 0
    for c in reversed(F.coeffs):
        acc = _fmul(acc, z.value, z.m) ^ c
    return FieldElem(z.m, acc)


# =============================================================================
# IRREDUCIBLE POLYNOMIALS OVER GF(2^q_degree)
# =============================================================================

def _candidate(t: int, m: int, q_degree: int) -> Poly:
    # bit i of t feeds bit (i // m) of coefficient (i % m), so small t spreads over all
    # coefficients; over F2 this is plain lexicographic order on (c_{m-1} ... c_0)
    coeffs = [0] * m
    i = 0
    while t:
        if t & 1:
            coeffs[i % m] |= 1 << (i // m)
        t >>= 1
        i += 1
    return Poly(q_degree, tuple(coeffs) + (1,))


def is_irreducible(f: Poly) -> bool:
    """Ben-Or test: gcd(f, x^(q^i) - x) = 1 for all i <= deg f / 2, q = 2^base_m."""
    m = f.degree
    if m < 1:
        return False
    if m == 1:
        return True
    x = Poly.x(f.base_m)
    power = x % f
    for _ in range(m // 2):
        for _ in range(f.base_m):
            power = power.square() % f
        if poly_gcd(f, power - x).degree != 0:
            return False
    return True


@lru_cache(maxsize=None)
def find_irreducible(m: int, q_degree: int = 1) -> Poly:
    """
    First monic irreducible polynomial of degree m over GF(2^q_degree).

    Candidates are visited by the interleaved-bit key of their lower coefficients
    (see ``_candidate``); the first one passing Ben-Or is returned.

    Args:
        m: degree, >= 1
        q_degree: base field is GF(2^q_degree)

    Returns:
        Monic irreducible Poly of degree m
    """
    if m < 1:
        raise ValueError("degree must be >= 1")
    t = 0
    while True:
        f = _candidate(t, m, q_degree)
        if is_irreducible(f):
            logger.debug("irreducible of degree %d over GF(2^%d) found after %d candidates",
                         m, q_degree, t + 1)
            return f
        t += 1


if __name__ == "__main__":
    for m in (2, 3, 4, 8, 16):
        print(f"GF(2^{m}) modulus: {modulus(m):#x}")
    print(f"degree 3 over F2: {find_irreducible(3, 1).coeffs}")
