"""
Linear Algebra over F2
======================
Bit vectors, matrices and subspaces of F2^n with n <= 64, stored as Python ints
(bit j = coordinate j, LSB-first) and vectorized over uint64 arrays with numpy.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import DimensionMismatchError

MAX_BITS = 64


def _check_width(n: int, what: str = "dimension"):
    if not 0 <= n <= MAX_BITS:
        raise DimensionMismatchError(f"{what} {n} outside supported range 0..{MAX_BITS}")


def parity(value: int) -> int:
    """Parity of the set bits of a non-negative int."""
    return value.bit_count() & 1


def inner(a: int, b: int) -> int:
    """Inner product <a, b> over F2."""
    return (a & b).bit_count() & 1


def parity_array(values: np.ndarray, mask: int) -> np.ndarray:
    """Vectorized <values[i], mask> over F2, returned as uint64 0/1."""
    masked = np.asarray(values, dtype=np.uint64) & np.uint64(mask)
    return (np.bitwise_count(masked) & 1).astype(np.uint64)


# =============================================================================
# BIT VECTORS
# =============================================================================

@dataclass(frozen=True)
class BitVec:
    """Element of F2^n. Bit j of ``value`` is the coefficient of coordinate j."""
    n: int
    value: int = 0

    def __post_init__(self):
        _check_width(self.n)
        if not 0 <= self.value < (1 << self.n):
            raise DimensionMismatchError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_int(cls, value: int, n: int) -> "BitVec":
        return cls(n, int(value))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitVec":
        value = 0
        for j, bit in enumerate(bits):
            if bit:
                value |= 1 << j
        return cls(len(bits), value)

    def to_int(self) -> int:
        return self.value

    def bits(self) -> Tuple[int, ...]:
        return tuple((self.value >> j) & 1 for j in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.n:
            raise IndexError(j)
        return (self.value >> j) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        if other.n != self.n:
            raise DimensionMismatchError(f"cannot add vectors of length {self.n} and {other.n}")
        return BitVec(self.n, self.value ^ other.value)

    def dot(self, other: "BitVec") -> int:
        if other.n != self.n:
            raise DimensionMismatchError(f"cannot pair vectors of length {self.n} and {other.n}")
        return inner(self.value, other.value)


# =============================================================================
# MATRICES
# =============================================================================

@dataclass(frozen=True)
class F2Matrix:
    """
    r x n matrix over F2.

    Row i is an int mask over the n columns, so ``(M v)_i = <rows[i], v>``.
    """
    n_rows: int
    n_cols: int
    rows: Tuple[int, ...]

    def __post_init__(self):
        _check_width(self.n_cols, "column count")
        if self.n_cols < 1:
            raise DimensionMismatchError("matrix needs at least one column")
        if self.n_rows < 0 or len(self.rows) != self.n_rows:
            raise DimensionMismatchError(
                f"expected {self.n_rows} rows, got {len(self.rows)}")
        limit = 1 << self.n_cols
        for row in self.rows:
            if not 0 <= row < limit:
                raise DimensionMismatchError(f"row {row:#x} wider than {self.n_cols} columns")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "F2Matrix":
        """Build from nested 0/1 lists, ``rows[i][j]`` = entry (i, j)."""
        if not rows:
            raise DimensionMismatchError("use F2Matrix.zeros for matrices without rows")
        masks = tuple(BitVec.from_bits(row).value for row in rows)
        return cls(len(rows), len(rows[0]), masks)

    @classmethod
    def from_columns(cls, columns: Sequence[int], n_rows: int) -> "F2Matrix":
        """Build from column masks (column j = image of e_j)."""
        rows = []
        for i in range(n_rows):
            mask = 0
            for j, col in enumerate(columns):
                if (col >> i) & 1:
                    mask |= 1 << j
            rows.append(mask)
        return cls(n_rows, len(columns), tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "F2Matrix":
        return cls(n_rows, n_cols, (0,) * n_rows)

    @classmethod
    def random(cls, rng: np.random.Generator, n_rows: int, n_cols: int) -> "F2Matrix":
        words = rng.integers(0, (1 << n_cols) - 1, size=n_rows, dtype=np.uint64, endpoint=True)
        return cls(n_rows, n_cols, tuple(int(w) for w in words))

    def column(self, j: int) -> BitVec:
        return BitVec(self.n_rows, sum(((row >> j) & 1) << i for i, row in enumerate(self.rows)))

    def stack(self, other: "F2Matrix") -> "F2Matrix":
        """Rows of ``self`` followed by rows of ``other``."""
        if other.n_cols != self.n_cols:
            raise DimensionMismatchError(
                f"cannot stack {self.n_cols}-column and {other.n_cols}-column matrices")
        return F2Matrix(self.n_rows + other.n_rows, self.n_cols, self.rows + other.rows)

    def to_dense(self) -> np.ndarray:
        """0/1 uint8 array of shape (n_rows, n_cols)."""
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for i, row in enumerate(self.rows):
            for j in range(self.n_cols):
                out[i, j] = (row >> j) & 1
        return out

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Vectorized product: every uint64 in ``values`` mapped to ``M v`` (needs n_rows <= 64)."""
        if self.n_rows > MAX_BITS:
            raise DimensionMismatchError(f"{self.n_rows} output bits do not fit a machine word")
        values = np.asarray(values, dtype=np.uint64)
        out = np.zeros(values.shape, dtype=np.uint64)
        for i, row in enumerate(self.rows):
            if row:
                out |= parity_array(values, row) << np.uint64(i)
        return out


def mat_vec_mul(M: F2Matrix, v: BitVec) -> BitVec:
    """
    Compute M v over F2.

    Args:
        M: r x n matrix
        v: vector of length n

    Returns:
        Vector of length r
    """
    if v.n != M.n_cols:
        raise DimensionMismatchError(f"vector of length {v.n} against {M.n_cols} columns")
    out = 0
    for i, row in enumerate(M.rows):
        out |= inner(row, v.value) << i
    return BitVec(M.n_rows, out)


# =============================================================================
# ELIMINATION
# =============================================================================

def rref(rows: Iterable[int], n_cols: int) -> Tuple[List[int], List[int]]:
    """
    Reduced row echelon form of a list of row masks.

    Pivots are taken column by column starting from column 0.

    Returns:
        (nonzero reduced rows, pivot column of each row)
    """
    rows = [int(r) for r in rows]
    pivots: List[int] = []
    rank = 0
    for col in range(n_cols):
        if rank == len(rows):
            break
        bit = 1 << col
        sel = next((i for i in range(rank, len(rows)) if rows[i] & bit), None)
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & bit:
                rows[i] ^= rows[rank]
        pivots.append(col)
        rank += 1
    return rows[:rank], pivots


def rank(M: F2Matrix) -> int:
    return len(rref(M.rows, M.n_cols)[1])


# =============================================================================
# SUBSPACES
# =============================================================================

@dataclass(frozen=True, eq=False)
class Subspace:
    """
    Linear subspace of F2^n given by independent basis masks.

    Equality is set equality, decided on the canonical RREF basis.
    """
    ambient_dim: int
    basis: Tuple[int, ...] = ()
    _canonical: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_width(self.ambient_dim)
        limit = 1 << self.ambient_dim
        for vec in self.basis:
            if not 0 <= vec < limit:
                raise DimensionMismatchError(
                    f"basis vector {vec:#x} outside F2^{self.ambient_dim}")
        reduced, _ = rref(self.basis, self.ambient_dim)
        if len(reduced) != len(self.basis):
            raise DimensionMismatchError("basis vectors are linearly dependent")
        object.__setattr__(self, "_canonical", tuple(sorted(reduced)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(1 << j for j in range(n)))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @classmethod
    def span(cls, n: int, vectors: Iterable[int]) -> "Subspace":
        """Subspace spanned by possibly dependent vectors (basis = RREF rows)."""
        reduced, _ = rref(vectors, n)
        return cls(n, tuple(reduced))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def canonical(self) -> Tuple[int, ...]:
        return self._canonical

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self._canonical == other._canonical

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self._canonical))

    def contains(self, v) -> bool:
        value = v.value if isinstance(v, BitVec) else int(v)
        reduced, _ = rref(self.basis + (value,), self.ambient_dim)
        return len(reduced) == self.dim

    def elements(self) -> np.ndarray:
        """
        All 2^dim elements as uint64, in plain binary order of basis coefficients:
        entry c is the sum of basis[i] over the set bits i of c.
        """
        out = np.zeros(1, dtype=np.uint64)
        for vec in self.basis:
            out = np.concatenate([out, out ^ np.uint64(vec)])
        return out

    def coefficients(self, v: int) -> int:
        """Coefficient index c of v in ``elements()`` order; raises if v is outside."""
        pairs = []
        for i, vec in enumerate(self.basis):
            img, tag = _reduce(pairs, vec, 1 << i)
            if img:
                pairs.append((img, tag))
        rest, tag = _reduce(pairs, int(v), 0)
        if rest:
            raise DimensionMismatchError(f"{int(v):#x} is not in the subspace")
        return tag


def _reduce(pairs: List[Tuple[int, int]], value: int, tag: int) -> Tuple[int, int]:
    # pairs hold (vector, tag) with distinct lowest set bits; clears value low bit by low bit
    lookup = {(img & -img): (img, t) for img, t in pairs}
    while value:
        low = value & -value
        hit = lookup.get(low)
        if hit is None:
            break
        value ^= hit[0]
        tag ^= hit[1]
    return value, tag


def kernel_basis(M: F2Matrix) -> Subspace:
    """
    Basis of {v : M v = 0}.

    One vector per non-pivot column f: e_f plus the pivot coordinates whose
    reduced row has bit f set.
    """
    reduced, pivots = rref(M.rows, M.n_cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(M.n_cols):
        if free in pivot_set:
            continue
        vec = 1 << free
        for row, pivot in zip(reduced, pivots):
            if (row >> free) & 1:
                vec |= 1 << pivot
        basis.append(vec)
    return Subspace(M.n_cols, tuple(basis))


def orthogonal_complement(V: Subspace) -> Subspace:
    """V-perp = {u : <u, v> = 0 for all v in V}, the kernel of the basis-as-rows matrix."""
    if V.dim == 0:
        return Subspace.full(V.ambient_dim)
    return kernel_basis(F2Matrix(V.dim, V.ambient_dim, V.basis))


def complement_space(V: Subspace) -> Subspace:
    """Direct-sum complement of V spanned by the standard vectors at non-pivot columns."""
    _, pivots = rref(V.basis, V.ambient_dim)
    pivot_set = set(pivots)
    return Subspace(V.ambient_dim,
                    tuple(1 << j for j in range(V.ambient_dim) if j not in pivot_set))


def coset_representative(M: F2Matrix, W: Subspace, y: BitVec) -> Optional[BitVec]:
    """
    Find a in W with M a = y.

    Args:
        M: r x n matrix
        W: subspace of F2^n complementing the kernel of M
        y: target of length r

    Returns:
        The representative, or None when y is outside the image of M
    """
    if y.n != M.n_rows:
        raise DimensionMismatchError(f"target of length {y.n} against {M.n_rows} rows")
    if W.ambient_dim != M.n_cols:
        raise DimensionMismatchError(
            f"subspace of F2^{W.ambient_dim} against {M.n_cols} columns")
    pairs: List[Tuple[int, int]] = []
    for w in W.basis:
        img, tag = _reduce(pairs, mat_vec_mul(M, BitVec(M.n_cols, w)).value, w)
        if img:
            pairs.append((img, tag))
    rest, a = _reduce(pairs, y.value, 0)
    if rest:
        return None
    return BitVec(M.n_cols, a)
