"""
Sketching from Spectral Queries
===============================
Plans every spectral query from the condenser alone, assembles the measurement
vector y = (M x, (M (x) B) x) from coset sums, and multiplies sparse vectors by
the same matrices inside recovery.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from src.condenser import LinearCondenser
from src.errors import DimensionMismatchError, SketchError
from src.gf2 import (
    BitVec, F2Matrix, Subspace, complement_space, kernel_basis, orthogonal_complement,
)
from src.wht import SpectrumOracle, TableSpectrumOracle, subspace_sums

logger = logging.getLogger(__name__)


# =============================================================================
# SPARSE VECTORS
# =============================================================================

@dataclass(frozen=True, eq=False)
class SparseVec:
    """Vector of length 2^n as sorted unique uint64 indices with nonzero values."""
    n: int
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint64))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.uint64)
        vals = np.asarray(self.values)
        if idx.shape != vals.shape or idx.ndim != 1:
            raise DimensionMismatchError("indices and values must be equal-length 1-d arrays")
        if idx.size and int(idx.max()) >= (1 << self.n):
            raise DimensionMismatchError(f"index outside F2^{self.n}")
        if idx.size > 1 and np.any(idx[1:] <= idx[:-1]):
            raise DimensionMismatchError("indices must be sorted and unique; use from_arrays")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, n: int, dtype=np.int64) -> "SparseVec":
        return cls(n, np.zeros(0, dtype=np.uint64), np.zeros(0, dtype=dtype))

    @classmethod
    def from_arrays(cls, n: int, indices, values) -> "SparseVec":
        """Sort, sum duplicate indices and drop zeros."""
        idx = np.asarray(indices, dtype=np.uint64)
        vals = np.asarray(values)
        if idx.size == 0:
            return cls(n, idx, vals.reshape(0))
        unique, inverse = np.unique(idx, return_inverse=True)
        summed = np.zeros(unique.shape, dtype=vals.dtype)
        np.add.at(summed, inverse, vals)
        keep = summed != 0
        return cls(n, unique[keep], summed[keep])

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Tuple[int, float]], dtype=None) -> "SparseVec":
        pairs = list(pairs)
        idx = [p[0].value if isinstance(p[0], BitVec) else int(p[0]) for p in pairs]
        vals = np.asarray([p[1] for p in pairs], dtype=dtype)
        return cls.from_arrays(n, np.asarray(idx, dtype=np.uint64), vals)

    @classmethod
    def from_dense(cls, values: np.ndarray) -> "SparseVec":
        values = np.asarray(values)
        n = values.shape[0].bit_length() - 1
        nz = np.flatnonzero(values)
        return cls(n, nz.astype(np.uint64), values[nz])

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.n, dtype=self.values.dtype)
        out[self.indices.astype(np.int64)] = self.values
        return out

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum())

    def get(self, i: int):
        pos = np.searchsorted(self.indices, np.uint64(i))
        if pos < self.nnz and self.indices[pos] == i:
            return self.values[pos]
        return self.values.dtype.type(0)

    def as_dict(self) -> Dict[int, float]:
        return {int(i): v.item() for i, v in zip(self.indices, self.values)}

    def __add__(self, other: "SparseVec") -> "SparseVec":
        if other.n != self.n:
            raise DimensionMismatchError(f"lengths 2^{self.n} and 2^{other.n} differ")
        return SparseVec.from_arrays(self.n, np.concatenate([self.indices, other.indices]),
                                     np.concatenate([self.values, other.values]))

    def __neg__(self) -> "SparseVec":
        return SparseVec(self.n, self.indices, -self.values)

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"SparseVec(n={self.n}, {self.as_dict()})"


def bit_select(i: Union[BitVec, int], b: int, n: Optional[int] = None) -> int:
    """
    Bit b (1-based, LSB-first) of index i.

    Args:
        i: index, as BitVec or int (then n bounds b)
        b: row of the bit-selection matrix, 1 <= b <= n
        n: index length when i is an int

    Returns:
        0 or 1
    """
    width = i.n if isinstance(i, BitVec) else n
    value = i.value if isinstance(i, BitVec) else int(i)
    if width is None:
        width = max(1, value.bit_length())
    if not 1 <= b <= width:
        raise ValueError(f"bit row {b} outside 1..{width}")
    return (value >> (b - 1)) & 1


# =============================================================================
# QUERY PLANS
# =============================================================================

@dataclass(frozen=True)
class BlockPlan:
    """Linear-algebra data of one (seed, bit) block; b = 0 is h_t itself."""
    t: int
    b: int
    matrix: F2Matrix
    kernel: Subspace
    dual: Subspace
    complement: Subspace


def tensor_matrix(M: F2Matrix, b: int) -> F2Matrix:
    """h^b(x) = (h(x), x(b)): the stack [M; e_b^T], output bit r carries bit b of x."""
    return M.stack(F2Matrix(1, M.n_cols, (1 << (b - 1),)))


def _block_plan(M: F2Matrix, t: int, b: int) -> BlockPlan:
    kernel = kernel_basis(M)
    return BlockPlan(t=t, b=b, matrix=M, kernel=kernel,
                     dual=orthogonal_complement(kernel), complement=complement_space(kernel))


@dataclass(frozen=True, eq=False)
class QueryPlan:
    """Every spectral position a sketch needs, fixed before the first query."""
    n: int
    r: int
    seeds: Tuple[int, ...]
    with_tensor: bool
    positions: np.ndarray
    blocks: Dict[Tuple[int, int], BlockPlan]

    @property
    def size(self) -> int:
        return int(self.positions.size)

    def for_seed(self, t: int) -> "QueryPlan":
        """Sub-plan holding only the blocks of seed t."""
        rows = self.n + 1 if self.with_tensor else 1
        blocks = {(t, b): self.blocks[(t, b)] for b in range(rows)}
        positions = np.unique(np.concatenate([p.dual.elements() for p in blocks.values()]))
        return QueryPlan(n=self.n, r=self.r, seeds=(t,), with_tensor=self.with_tensor,
                         positions=positions, blocks=blocks)

    @staticmethod
    def bound(n: int, r: int, D: int) -> int:
        """D 2^(r+1) (n+1), the worst-case size of a tensor plan."""
        return D * (1 << (r + 1)) * (n + 1)


def plan_queries(cond: LinearCondenser, with_tensor: bool,
                 seeds: Optional[Sequence[int]] = None) -> QueryPlan:
    """
    Union over seeds t of (ker h_t)-perp and, with the tensor rows, of
    (ker h_t^b)-perp for b = 1..n. Touches no oracle.

    Args:
        cond: the condenser
        with_tensor: include the bit-selection blocks
        seeds: seeds to plan for; all of [D] by default

    Returns:
        QueryPlan with sorted unique positions and per-block subspaces
    """
    seeds = tuple(range(cond.D)) if seeds is None else tuple(sorted(set(int(t) for t in seeds)))
    blocks: Dict[Tuple[int, int], BlockPlan] = {}
    parts: List[np.ndarray] = []
    for t in seeds:
        M = cond.matrix(t)
        rows = range(cond.n + 1) if with_tensor else range(1)
        for b in rows:
            plan = _block_plan(M if b == 0 else tensor_matrix(M, b), t, b)
            blocks[(t, b)] = plan
            parts.append(plan.dual.elements())
    positions = np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.uint64)
    logger.debug("planned %d spectral positions for %d seeds (tensor=%s)",
                 positions.size, len(seeds), with_tensor)
    return QueryPlan(n=cond.n, r=cond.r, seeds=seeds, with_tensor=with_tensor,
                     positions=positions, blocks=blocks)


# =============================================================================
# SKETCHES
# =============================================================================

@dataclass(frozen=True, eq=False)
class Sketch:
    """
    Measurements y(j, t, b), stored b-major then seed then j with shape
    (n+1, len(seeds), 2^r) (or (1, ...) without tensor rows).

    Row b = 0 is M^t x; rows b >= 1 are (M^t (x) B_b) x.
    """
    n: int
    r: int
    D: int
    with_tensor: bool
    entries: np.ndarray
    seeds: Tuple[int, ...] = ()

    def __post_init__(self):
        seeds = self.seeds or tuple(range(self.entries.shape[1]))
        object.__setattr__(self, "seeds", seeds)
        rows = self.n + 1 if self.with_tensor else 1
        if self.entries.shape != (rows, len(seeds), 1 << self.r):
            raise DimensionMismatchError(
                f"sketch entries have shape {self.entries.shape}, "
                f"expected {(rows, len(seeds), 1 << self.r)}")

    def block(self, t: int) -> np.ndarray:
        """(rows, 2^r) measurements of seed t."""
        return self.entries[:, self.seeds.index(t), :]

    def flat_index(self, j: int, t: int, b: int) -> int:
        """Position of y(j, t, b) in layout order."""
        return (b * len(self.seeds) + self.seeds.index(t)) * (1 << self.r) + j

    def unravel(self, position: int) -> Tuple[int, int, int]:
        """(j, t, b) of a layout position."""
        per_b = len(self.seeds) << self.r
        b, rest = divmod(position, per_b)
        t_pos, j = divmod(rest, 1 << self.r)
        return j, self.seeds[t_pos], b


def _block_values(planned: SpectrumOracle, plan: BlockPlan, r: int) -> np.ndarray:
    """Bucket values of one block, length 2^(rows of its matrix); rows outside the image are 0."""
    sums = subspace_sums(planned, plan.complement, plan.dual)
    buckets = plan.matrix.apply(plan.complement.elements()).astype(np.int64)
    out = np.zeros(1 << plan.matrix.n_rows, dtype=sums.dtype)
    out[buckets] = sums
    return out


def _seed_rows(planned: SpectrumOracle, plan: QueryPlan, t: int, integer: bool) -> np.ndarray:
    r = plan.r
    base = _block_values(planned, plan.blocks[(t, 0)], r)
    if not plan.with_tensor:
        return base[None, :]
    rows = [base]
    for b in range(1, plan.n + 1):
        both = _block_values(planned, plan.blocks[(t, b)], r)
        low, high = both[: 1 << r], both[1 << r:]
        consistent = (np.array_equal(low + high, base) if integer
                      else np.allclose(low + high, base, rtol=1e-9, atol=1e-9 * (1 + np.abs(base).max())))
        if not consistent:
            raise SketchError(f"bit-0 and bit-1 halves of seed {t}, bit {b} do not sum to M^t x")
        rows.append(high)
    return np.stack(rows)


def _fetch(oracle: SpectrumOracle, positions: np.ndarray) -> TableSpectrumOracle:
    values = oracle.query_many(positions)
    return TableSpectrumOracle(positions, values, oracle.n, oracle.integer)


def build_sketch(oracle: SpectrumOracle, cond: LinearCondenser, with_tensor: bool,
                 plan: Optional[QueryPlan] = None, n_jobs: int = 1) -> Sketch:
    """
    Measure y = (M x, (M (x) B) x) from spectral queries only.

    Every planned position is queried exactly once; the per-(t, b) coset sums
    then run against the fetched table, seeds in parallel when ``n_jobs`` > 1.

    Args:
        oracle: spectrum access, unarmed or armed with the plan
        cond: condenser defining M
        with_tensor: also measure the bit-selection rows
        plan: a plan for ``cond``; computed when omitted
        n_jobs: joblib threads

    Returns:
        Sketch over the plan's seeds
    """
    if oracle.n != cond.n:
        raise DimensionMismatchError(f"oracle over F2^{oracle.n}, condenser over F2^{cond.n}")
    if plan is None:
        plan = plan_queries(cond, with_tensor)
    if plan.with_tensor != with_tensor or plan.n != cond.n or plan.r != cond.r:
        raise DimensionMismatchError("plan was made for a different condenser or layout")
    planned = _fetch(oracle, plan.positions)
    per_seed = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_seed_rows)(planned, plan, t, oracle.integer) for t in plan.seeds)
    entries = np.stack(per_seed, axis=1)
    return Sketch(n=cond.n, r=cond.r, D=cond.D, with_tensor=with_tensor,
                  entries=entries, seeds=plan.seeds)


class LazySketch:
    """
    Sketch whose per-seed blocks are computed on first use and cached; used when
    the seed space is too large to sketch in full.

    With a plan, every planned position is queried once when the sketch is made
    and blocks are computed from that table. Without one, each new seed queries
    only the positions no earlier seed has fetched.
    """

    def __init__(self, oracle: SpectrumOracle, cond: LinearCondenser,
                 plan: Optional[QueryPlan] = None):
        if oracle.n != cond.n:
            raise DimensionMismatchError(f"oracle over F2^{oracle.n}, condenser over F2^{cond.n}")
        if plan is not None and (not plan.with_tensor or plan.n != cond.n or plan.r != cond.r):
            raise DimensionMismatchError("plan was made for a different condenser or layout")
        self.oracle = oracle
        self.cond = cond
        self.n, self.r, self.D = cond.n, cond.r, cond.D
        self.with_tensor = True
        self._plan = plan
        self._blocks: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        self._positions = np.zeros(0, dtype=np.uint64)
        self._values = np.zeros(0, dtype=np.int64 if oracle.integer else np.float64)
        if plan is not None:
            self._table = _fetch(oracle, plan.positions)
            logger.debug("lazy sketch fetched %d planned positions", plan.size)

    @property
    def seeds_touched(self) -> int:
        return len(self._blocks)

    def _grow(self, positions: np.ndarray) -> TableSpectrumOracle:
        """Table over every position fetched so far; queries only the new ones."""
        fresh = np.setdiff1d(positions, self._positions)
        if fresh.size:
            merged = np.concatenate([self._positions, fresh])
            values = np.concatenate([self._values, self.oracle.query_many(fresh)])
            order = np.argsort(merged)
            self._positions, self._values = merged[order], values[order]
        return TableSpectrumOracle(self._positions, self._values, self.n, self.oracle.integer)

    def block(self, t: int) -> np.ndarray:
        with self._lock:
            cached = self._blocks.get(t)
            if cached is not None:
                return cached
            if self._plan is not None:
                if (t, 0) not in self._plan.blocks:
                    raise SketchError(f"seed {t} is outside the planned seeds")
                rows = _seed_rows(self._table, self._plan, t, self.oracle.integer)
            else:
                seed_plan = plan_queries(self.cond, True, seeds=[t])
                rows = _seed_rows(self._grow(seed_plan.positions), seed_plan, t,
                                  self.oracle.integer)
            self._blocks[t] = rows
            return rows


# =============================================================================
# SPARSE PRODUCTS
# =============================================================================

def sparse_matvec(cond: LinearCondenser, t: int, w: SparseVec, with_bits: bool) -> np.ndarray:
    """
    M^t w (and (M^t (x) B_b) w for b = 1..n) by scattering each (i, v) into bucket
    h_t(i), and into row b when bit b of i is 1.

    Returns:
        Shape (2^r,) without bits, (n+1, 2^r) with them
    """
    cond.check_seed(t)
    if w.n != cond.n:
        raise DimensionMismatchError(f"vector over F2^{w.n}, condenser over F2^{cond.n}")
    size = 1 << cond.r
    rows = cond.n + 1 if with_bits else 1
    out = np.zeros((rows, size), dtype=w.values.dtype)
    if w.nnz:
        buckets = cond.hash_indices(w.indices, t)
        np.add.at(out[0], buckets, w.values)
        for b in range(1, rows):
            mask = ((w.indices >> np.uint64(b - 1)) & np.uint64(1)).astype(bool)
            np.add.at(out[b], buckets[mask], w.values[mask])
    return out if with_bits else out[0]
