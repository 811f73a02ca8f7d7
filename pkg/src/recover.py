"""
Iterative Sparse Recovery
=========================
Search / Estimate / Recover over a condenser sketch, the randomized variant that
samples seeds, best-k truncation and final integer rounding.
"""

import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from src.condenser import LinearCondenser
from src.config import MAX_PLAN_SIZE, RecoveryConfig
from src.errors import DimensionMismatchError, SketchError, UnsupportedParametersError
from src.gf2 import BitVec
from src.sketch import (
    LazySketch, QueryPlan, Sketch, SparseVec, build_sketch, plan_queries, sparse_matvec,
)
from src.wht import SpectrumOracle

logger = logging.getLogger(__name__)


@dataclass
class IterationState:
    """Where the engine is: iterate x^s, its history and the residual blocks in use."""
    s: int
    x_s: SparseVec
    history: List[SparseVec] = field(default_factory=list)
    residuals: Dict[int, np.ndarray] = field(default_factory=dict)


@dataclass
class RecoveryResult:
    """Output of a recovery run plus the bookkeeping reports are built from."""
    estimate: SparseVec
    raw_estimate: SparseVec
    history: List[SparseVec]
    residual_norms: List[float]
    selected_seeds: List[int]
    selected_iteration: int
    iterations: int
    seeds_touched: int = 0
    queries: int = 0
    plan_size: int = 0
    wall_ms: float = 0.0


# =============================================================================
# BUILDING BLOCKS
# =============================================================================

def hk_truncate(x: Union[SparseVec, np.ndarray], k: int) -> SparseVec:
    """
    H_k(x): keep the k largest-magnitude entries, ties going to the smaller index.

    Args:
        x: sparse or dense vector
        k: entries to keep, >= 0

    Returns:
        k-sparse SparseVec (x itself when it already has <= k nonzeros)
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if not isinstance(x, SparseVec):
        x = SparseVec.from_dense(x)
    if x.nnz <= k:
        return x
    order = np.lexsort((x.indices, -np.abs(x.values)))[:k]
    keep = np.sort(order)
    return SparseVec(x.n, x.indices[keep], x.values[keep])


def _search_many(js: np.ndarray, buckets: np.ndarray) -> np.ndarray:
    n = buckets.shape[0] - 1
    lead = np.abs(buckets[0, js])
    bits = 2 * np.abs(buckets[1:, js]) >= lead
    out = np.zeros(js.shape, dtype=np.uint64)
    for b in range(n):
        out |= bits[b].astype(np.uint64) << np.uint64(b)
    return out


def search(j: Union[BitVec, int], buckets: np.ndarray) -> BitVec:
    """
    Binary search for the leader of bucket j of one seed.

    Bit b of the answer is 1 iff |y^b(j)| >= |y^0(j)| / 2.

    Args:
        j: bucket index in F2^r
        buckets: residual rows y^0..y^n of the seed, shape (n+1, 2^r)

    Returns:
        Candidate index in F2^n
    """
    position = j.value if isinstance(j, BitVec) else int(j)
    if not 0 <= position < buckets.shape[1]:
        raise DimensionMismatchError(f"bucket {position} outside [0, {buckets.shape[1]})")
    n = buckets.shape[0] - 1
    value = int(_search_many(np.array([position]), buckets)[0])
    return BitVec.from_int(value, n)


def estimate(t: int, buckets: np.ndarray, cond: LinearCondenser, k: int) -> SparseVec:
    """
    Correction Delta for seed t.

    T holds the 2k largest nonzero |y^0(j)| (ties to smaller j). For j in T the
    searched index u is kept, with value y^0(h_t(u)), only if h_t(u) is in T.

    Args:
        t: seed
        buckets: residual rows of seed t, shape (n+1, 2^r)
        cond: condenser
        k: sparsity

    Returns:
        SparseVec with at most 2k nonzeros
    """
    y0 = buckets[0]
    nonzero = np.flatnonzero(y0)
    if nonzero.size == 0:
        return SparseVec.zeros(cond.n, y0.dtype)
    order = np.lexsort((nonzero, -np.abs(y0[nonzero])))[: 2 * k]
    top = nonzero[order]
    found = _search_many(top, buckets)
    landed = cond.hash_indices(found, t)
    ok = np.isin(landed, top)
    found, landed = found[ok], landed[ok]
    indices, first = np.unique(found, return_index=True)
    return SparseVec(cond.n, indices, y0[landed[first]])


def round_to_integers(x: SparseVec) -> SparseVec:
    """Nearest integer per entry, halves away from zero; zeros dropped."""
    if np.issubdtype(x.values.dtype, np.integer):
        return SparseVec.from_arrays(x.n, x.indices, x.values.astype(np.int64))
    rounded = np.sign(x.values) * np.floor(np.abs(x.values) + 0.5)
    return SparseVec.from_arrays(x.n, x.indices, rounded.astype(np.int64))


def _residual(source, cond: LinearCondenser, t: int, x: SparseVec, with_bits: bool) -> np.ndarray:
    block = source.block(t)
    if with_bits:
        return block - sparse_matvec(cond, t, x, True)
    return block[0] - sparse_matvec(cond, t, x, False)


def _score(cond: LinearCondenser, base: Mapping[int, np.ndarray], weights: Mapping[int, int],
           delta: SparseVec):
    """sum_t' weight(t') ||r_t' - M^t' delta||_1 for base residual rows r."""
    total = 0
    for t, weight in weights.items():
        total += weight * np.abs(base[t] - sparse_matvec(cond, t, delta, False)).sum()
    return total


def _argmin(values) -> int:
    # np.argmin returns the first minimum, which is the smallest-index tie rule
    return int(np.argmin(np.asarray(values)))


# =============================================================================
# DETERMINISTIC RECOVERY
# =============================================================================

def recover_deterministic(y: Sketch, cond: LinearCondenser, config: RecoveryConfig) -> RecoveryResult:
    """
    Deterministic Recover over a full tensor sketch.

    Each iteration forms residual rows y(., t, .) - M^t x^s for every seed,
    takes Delta^{s,t} = Estimate(t), picks t0 minimizing ||M x - M(x^s + Delta)||_1
    (ties to the smaller seed) and sets x^{s+1} = H_k(x^s + Delta^{s,t0}). The
    iterate with the smallest ||M x - M x^s||_1 is returned. A zero residual is a
    fixed point, so the loop stops there and the history is padded.

    Args:
        y: sketch over all D seeds with tensor rows
        cond: the condenser the sketch was built with
        config: k, s0 and threading

    Returns:
        RecoveryResult (estimate not yet rounded)
    """
    if y.n != cond.n or y.r != cond.r:
        raise DimensionMismatchError(f"sketch (n={y.n}, r={y.r}) against {cond.describe()}")
    if not y.with_tensor:
        raise SketchError("recovery needs the bit-selection rows")
    if y.seeds != tuple(range(cond.D)):
        raise SketchError("deterministic recovery needs every seed of the condenser")
    k = config.k
    s0 = config.resolved_s0(cond.n)
    seeds = y.seeds
    weights = {t: 1 for t in seeds}
    run = Parallel(n_jobs=config.n_jobs, prefer="threads")

    state = IterationState(s=0, x_s=SparseVec.zeros(cond.n, y.entries.dtype))
    state.history.append(state.x_s)
    norms: List[float] = []
    chosen: List[int] = []
    while True:
        state.residuals = {t: _residual(y, cond, t, state.x_s, True) for t in seeds}
        base = {t: rows[0] for t, rows in state.residuals.items()}
        norm = sum(np.abs(rows).sum() for rows in base.values())
        norms.append(norm)
        logger.debug("iteration %d: ||Mx - Mx^s||_1 = %s, nnz %d", state.s, norm, state.x_s.nnz)
        if state.s == s0 or norm == 0:
            break
        deltas = run(delayed(estimate)(t, state.residuals[t], cond, k) for t in seeds)
        scores = run(delayed(_score)(cond, base, weights, delta) for delta in deltas)
        best = _argmin(scores)
        state.x_s = hk_truncate(state.x_s + deltas[best], k)
        state.history.append(state.x_s)
        chosen.append(seeds[best])
        state.s += 1

    iterations = state.s
    while len(state.history) < s0 + 1:
        state.history.append(state.x_s)
        norms.append(norms[-1])
    selected = _argmin(norms)
    raw = state.history[selected]
    return RecoveryResult(estimate=raw, raw_estimate=raw, history=state.history,
                          residual_norms=[float(v) for v in norms], selected_seeds=chosen,
                          selected_iteration=selected, iterations=iterations,
                          seeds_touched=len(seeds))


# =============================================================================
# RANDOMIZED RECOVERY
# =============================================================================

@dataclass(frozen=True)
class SeedSchedule:
    """Seed multisets of a randomized run, drawn before any query."""
    search: np.ndarray
    select: np.ndarray
    final: np.ndarray

    def all_seeds(self) -> np.ndarray:
        return np.unique(np.concatenate([self.search.ravel(), self.select.ravel(), self.final]))


def draw_schedule(D: int, s0: int, q: int, rng_seed: int) -> SeedSchedule:
    """Draw the search multisets, the selection multisets and the final multiset, each of q seeds."""
    rng = np.random.default_rng(rng_seed)

    def draw(shape):
        return rng.integers(0, D - 1, size=shape, dtype=np.uint64, endpoint=True)

    return SeedSchedule(search=draw((s0, q)), select=draw((s0, q)), final=draw(q))


def recover_randomized(y: LazySketch, cond: LinearCondenser, config: RecoveryConfig,
                       schedule: Optional[SeedSchedule] = None) -> RecoveryResult:
    """
    Randomized Recover over a lazily measured sketch.

    Iteration s estimates Delta^{s,t} only for the q seeds of its search multiset,
    picks t0 against a fresh selection multiset and truncates to k terms; the
    final iterate is chosen against a third multiset. Only the seeds in the
    schedule are ever measured.

    Args:
        y: lazily measured sketch over cond
        cond: condenser, typically with a huge seed space
        config: k, s0, q, eta and rng_seed
        schedule: pre-drawn seed multisets; drawn from config when omitted

    Returns:
        RecoveryResult (estimate not yet rounded)
    """
    if y.n != cond.n or y.r != cond.r:
        raise DimensionMismatchError(f"sketch (n={y.n}, r={y.r}) against {cond.describe()}")
    k = config.k
    s0 = config.resolved_s0(cond.n)
    if schedule is None:
        schedule = draw_schedule(cond.D, s0, config.resolved_q(s0), config.rng_seed)
    if schedule.search.shape[0] != s0:
        raise ValueError(f"schedule covers {schedule.search.shape[0]} iterations, need {s0}")
    run = Parallel(n_jobs=config.n_jobs, prefer="threads")

    dtype = y.block(int(schedule.search[0, 0])).dtype
    state = IterationState(s=0, x_s=SparseVec.zeros(cond.n, dtype))
    state.history.append(state.x_s)
    chosen: List[int] = []
    for s in range(s0):
        candidates = [int(t) for t in np.unique(schedule.search[s])]
        state.residuals = {t: _residual(y, cond, t, state.x_s, True) for t in candidates}
        deltas = run(delayed(estimate)(t, state.residuals[t], cond, k) for t in candidates)
        weights = Counter(int(t) for t in schedule.select[s])
        base = {t: _residual(y, cond, t, state.x_s, False) for t in weights}
        scores = run(delayed(_score)(cond, base, weights, delta) for delta in deltas)
        best = _argmin(scores)
        state.x_s = hk_truncate(state.x_s + deltas[best], k)
        state.history.append(state.x_s)
        chosen.append(candidates[best])
        state.s += 1

    weights = Counter(int(t) for t in schedule.final)
    norms = []
    for x_s in state.history:
        base = {t: _residual(y, cond, t, x_s, False) for t in weights}
        norms.append(_score(cond, base, weights, SparseVec.zeros(cond.n, dtype)))
    selected = _argmin(norms)
    raw = state.history[selected]
    return RecoveryResult(estimate=raw, raw_estimate=raw, history=state.history,
                          residual_norms=[float(v) for v in norms], selected_seeds=chosen,
                          selected_iteration=selected, iterations=s0,
                          seeds_touched=y.seeds_touched)


# =============================================================================
# END TO END
# =============================================================================

def end_to_end(oracle: SpectrumOracle, cond: LinearCondenser, config: RecoveryConfig,
               max_plan_size: int = MAX_PLAN_SIZE) -> RecoveryResult:
    """
    Plan, arm the oracle, sketch, recover and round.

    Args:
        oracle: spectrum of an integer signal
        cond: condenser
        config: recovery parameters; ``mode`` picks the engine
        max_plan_size: refuse plans whose worst-case size exceeds this

    Returns:
        RecoveryResult whose ``estimate`` is the rounded k-sparse answer
    """
    start = time.perf_counter()
    n, r = cond.n, cond.r
    before = oracle.query_count
    if config.mode == "deterministic":
        bound = QueryPlan.bound(n, r, cond.D)
        if bound > max_plan_size:
            raise UnsupportedParametersError(
                f"deterministic plan for {cond.describe()} may need {bound:,} queries "
                f"(limit {max_plan_size:,})")
        plan = plan_queries(cond, with_tensor=True)
    else:
        s0 = config.resolved_s0(n)
        schedule = draw_schedule(cond.D, s0, config.resolved_q(s0), config.rng_seed)
        seeds = schedule.all_seeds()
        bound = QueryPlan.bound(n, r, int(seeds.size))
        if bound > max_plan_size:
            raise UnsupportedParametersError(
                f"randomized schedule touches {seeds.size} seeds, up to {bound:,} queries "
                f"(limit {max_plan_size:,})")
        plan = plan_queries(cond, with_tensor=True, seeds=[int(t) for t in seeds])

    oracle.arm(plan)
    try:
        if config.mode == "deterministic":
            sketch = build_sketch(oracle, cond, True, plan, n_jobs=config.n_jobs)
            result = recover_deterministic(sketch, cond, config)
        else:
            result = recover_randomized(LazySketch(oracle, cond, plan), cond, config, schedule)
    finally:
        oracle.disarm()

    result.estimate = round_to_integers(result.raw_estimate)
    result.queries = oracle.query_count - before
    result.plan_size = plan.size
    result.wall_ms = (time.perf_counter() - start) * 1000
    logger.info("%s recovery with %s: %d queries, %d seeds, iterate %d selected",
                config.mode, cond.describe(), result.queries, result.seeds_touched,
                result.selected_iteration)
    return result
