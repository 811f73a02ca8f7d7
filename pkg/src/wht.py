"""
Walsh-Hadamard Transform and Spectral Oracles
=============================================
Fast transform, query-counting access to a spectrum, and the subspace-sum
sampler computing every coset sum x(a + V) from x-hat restricted to V-perp.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from src.errors import DimensionMismatchError, PlanViolationError, SketchError
from src.gf2 import BitVec, Subspace, parity_array

logger = logging.getLogger(__name__)


@dataclass
class DenseSignal:
    """A real (or integer) vector of length 2^n indexed by F2^n."""
    n: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (1 << self.n,):
            raise DimensionMismatchError(
                f"expected {1 << self.n} values for n={self.n}, got shape {self.values.shape}")

    @property
    def N(self) -> int:
        return 1 << self.n

    def is_integral(self) -> bool:
        if np.issubdtype(self.values.dtype, np.integer):
            return True
        return bool(np.all(np.isfinite(self.values)) and np.all(self.values == np.round(self.values)))


def _butterfly(values: np.ndarray) -> np.ndarray:
    """Unnormalized Hadamard transform, entry i -> sum_j (-1)^<i,j> values[j]."""
    a = np.array(values, copy=True)
    size = a.shape[0]
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size)


def fwht(x: DenseSignal, normalized: bool = True) -> DenseSignal:
    """
    Walsh-Hadamard transform x-hat(i) = N^(-1/2) sum_j (-1)^<i,j> x(j).

    Args:
        x: signal of length N = 2^n
        normalized: divide by sqrt(N); without it integer inputs stay exact integers

    Returns:
        The transform; applying it twice (normalized) returns x
    """
    values = x.values
    if normalized:
        return DenseSignal(x.n, _butterfly(values.astype(np.float64)) / np.sqrt(x.N))
    if np.issubdtype(values.dtype, np.integer):
        return DenseSignal(x.n, _butterfly(values.astype(np.int64)))
    return DenseSignal(x.n, _butterfly(values.astype(np.float64)))


# =============================================================================
# SPECTRUM ORACLES
# =============================================================================

class SpectrumOracle(ABC):
    """
    Counting access to a spectrum.

    In float mode queries return x-hat(i); in integer mode they return
    sqrt(N) x-hat(i), which is an exact integer for integer signals. Once armed
    with a plan, queries outside it raise PlanViolationError.
    """

    def __init__(self, n: int, integer: bool = False):
        self.n = n
        self.integer = integer
        self._lock = threading.Lock()
        self._count = 0
        self._log: List[np.ndarray] = []
        self._allowed: Optional[np.ndarray] = None

    @abstractmethod
    def _lookup(self, positions: np.ndarray) -> np.ndarray:
        """Values at uint64 positions."""

    @property
    def query_count(self) -> int:
        return self._count

    def arm(self, plan) -> None:
        """Restrict queries to ``plan.positions`` (or to an array of positions)."""
        positions = getattr(plan, "positions", plan)
        self._allowed = np.unique(np.asarray(positions, dtype=np.uint64))

    def disarm(self) -> None:
        self._allowed = None

    @property
    def armed(self) -> bool:
        return self._allowed is not None

    def query(self, i: Union[BitVec, int]):
        position = i.value if isinstance(i, BitVec) else int(i)
        return self.query_many(np.array([position], dtype=np.uint64))[0]

    def query_many(self, positions: np.ndarray) -> np.ndarray:
        positions = np.asarray(positions, dtype=np.uint64)
        if positions.size and int(positions.max()) >= (1 << self.n):
            raise DimensionMismatchError(f"spectral position outside F2^{self.n}")
        if self._allowed is not None:
            outside = ~np.isin(positions, self._allowed)
            if outside.any():
                raise PlanViolationError(
                    f"query at {int(positions[outside][0])} is not in the armed plan")
        with self._lock:
            self._count += positions.size
            self._log.append(positions.copy())
        return self._lookup(positions)

    def queried_positions(self) -> np.ndarray:
        """Every queried position in query order (repeats included)."""
        with self._lock:
            if not self._log:
                return np.zeros(0, dtype=np.uint64)
            return np.concatenate(self._log)


class DenseSpectrumOracle(SpectrumOracle):
    """Oracle backed by a full spectrum array."""

    def __init__(self, values: np.ndarray, n: int, integer: bool = False):
        super().__init__(n, integer)
        self._values = np.asarray(values)

    def _lookup(self, positions: np.ndarray) -> np.ndarray:
        return self._values[positions.astype(np.int64)]


class TableSpectrumOracle(SpectrumOracle):
    """Oracle over values fetched for a sorted set of positions."""

    def __init__(self, positions: np.ndarray, values: np.ndarray, n: int, integer: bool):
        super().__init__(n, integer)
        self._positions = np.asarray(positions, dtype=np.uint64)
        self._values = np.asarray(values)
        self.arm(self._positions)

    def _lookup(self, positions: np.ndarray) -> np.ndarray:
        return self._values[np.searchsorted(self._positions, positions)]


def oracle_from_dense(xhat: DenseSignal, integer: bool = False) -> DenseSpectrumOracle:
    """Oracle serving ``xhat`` (sqrt(N) x-hat when ``integer``)."""
    values = xhat.values.astype(np.int64) if integer else xhat.values.astype(np.float64)
    return DenseSpectrumOracle(values, xhat.n, integer)


def oracle_from_signal(x: DenseSignal, integer: bool = True) -> DenseSpectrumOracle:
    """Transform ``x`` and wrap the spectrum; integer mode needs an integral signal."""
    if integer:
        if not x.is_integral():
            raise ValueError("integer mode needs an integer signal")
        return oracle_from_dense(fwht(DenseSignal(x.n, x.values.astype(np.int64)),
                                      normalized=False), integer=True)
    return oracle_from_dense(fwht(x), integer=False)


# =============================================================================
# SUBSPACE SUMS
# =============================================================================

def subspace_sums(oracle: SpectrumOracle, W: Subspace, Vperp: Subspace) -> np.ndarray:
    """
    Coset sums x(a + V) for every a in W, with V = (V-perp)-perp.

    Uses x(a + V) = |V| N^(-1/2) sum_{j in V-perp} (-1)^<a,j> x-hat(j) and exactly
    2^r queries, one per element of V-perp. Writing j = sum c_i v_i over the
    V-perp basis, the sum is a Hadamard transform in the coefficients c: each
    butterfly level splits on one basis vector v_i and combines the two halves
    as S0 + (-1)^<a,v_i> S1. The result for a is read at the index whose bit i
    is <a, v_i>, which is a bijection because W complements V.

    Args:
        oracle: spectrum access
        W: complement of V, dim r
        Vperp: dual of V, dim r

    Returns:
        Length-2^r array, entry c = x(sum of W.basis[i] over bits i of c)
    """
    n = oracle.n
    if W.ambient_dim != n or Vperp.ambient_dim != n:
        raise DimensionMismatchError(f"subspaces must live in F2^{n}")
    if W.dim != Vperp.dim:
        raise DimensionMismatchError(f"dim W = {W.dim} but dim V-perp = {Vperp.dim}")
    r = W.dim

    dual = Vperp.elements()
    coeff_sums = _butterfly(oracle.query_many(dual))

    reps = W.elements()
    index = np.zeros(reps.shape, dtype=np.uint64)
    for i, v in enumerate(Vperp.basis):
        index |= parity_array(reps, v) << np.uint64(i)
    if np.unique(index).size != index.size:
        raise DimensionMismatchError("W does not complement the kernel of V-perp")
    sums = coeff_sums[index.astype(np.int64)]

    if oracle.integer:
        sums = sums.astype(np.int64)
        quotient, remainder = np.divmod(sums, 1 << r)
        if np.any(remainder):
            raise SketchError("integer-mode coset sums are not integral; is the signal integer?")
        return quotient
    return sums * (2.0 ** (n - r) / 2.0 ** (n / 2))


if __name__ == "__main__":
    rng = np.random.default_rng(0)
    x = DenseSignal(10, rng.normal(size=1 << 10))
    back = fwht(fwht(x))
    print(f"✓ fwht involution error: {np.abs(back.values - x.values).max():.2e}")
