"""
Linear Lossless Condensers
==========================
Seeded families h(., t): F2^n -> F2^r, each F2-linear, with three constructions
(GUV, leftover hash, certified random matrices) and brute-force verifiers for
expansion and universality.
"""

import itertools
import logging
import math
import threading
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import (
    CondenserConfig, EXHAUSTIVE_BUDGET, EXPANSION_TRIALS, CERTIFICATION_RETRIES,
    UNIVERSALITY_MAX_N,
)
from src.errors import (
    BudgetExceededError, CertificationError, DimensionMismatchError,
    UnsupportedParametersError,
)
from src.field import (
    FieldElem, Poly, find_irreducible, gf_mul, gf_mul_array, poly_eval, poly_mod_pow,
)
from src.gf2 import BitVec, F2Matrix, MAX_BITS, mat_vec_mul, rank

logger = logging.getLogger(__name__)

# Largest seed count the verifiers enumerate
MAX_VERIFIED_SEEDS = 1 << 16


# =============================================================================
# REPORTS
# =============================================================================

class ExpansionReport(BaseModel):
    """Outcome of an expansion check |Gamma(S)| >= (1 - eps) D |S|."""
    k_max: int
    eps: float
    mode: str
    sets_checked: int
    worst_ratio: float = Field(..., description="min over checked S of |Gamma(S)| / (D |S|)")
    witness: Optional[List[int]] = Field(default=None, description="Worst violating set, if any")
    passed: bool


class UniversalityReport(BaseModel):
    """Outcome of the collision check Pr_t[h_t(x) = h_t(x')] <= 2^-r."""
    n: int
    r: int
    seeds: int
    pairs: int
    max_collision_prob: float
    bound: float
    worst_pair: Optional[Tuple[int, int]] = None
    passed: bool


# =============================================================================
# CONDENSER FAMILIES
# =============================================================================

class LinearCondenser(ABC):
    """
    A family {h_t : t in [D]} of linear maps F2^n -> F2^r.

    Subclasses implement ``_evaluate`` on int-encoded inputs; matrices are
    materialized from the images of the standard basis and cached per seed.
    """

    backend = ""

    def __init__(self, n: int, r: int, D: int):
        if not 1 <= n <= MAX_BITS:
            raise DimensionMismatchError(f"input length {n} outside 1..{MAX_BITS}")
        if r < 0:
            raise DimensionMismatchError("output length must be non-negative")
        if D < 1:
            raise DimensionMismatchError("need at least one seed")
        self.n = n
        self.r = r
        self.D = D
        self._matrices: Dict[int, F2Matrix] = {}
        self._lock = threading.Lock()

    @abstractmethod
    def _evaluate(self, x: int, t: int) -> int:
        """h_t(x) on int encodings."""

    def check_seed(self, t: int):
        if not 0 <= t < self.D:
            raise DimensionMismatchError(f"seed {t} outside [0, {self.D})")

    def eval(self, x: BitVec, t: int) -> BitVec:
        if x.n != self.n:
            raise DimensionMismatchError(f"input of length {x.n}, condenser takes {self.n}")
        self.check_seed(t)
        return BitVec(self.r, self._evaluate(x.value, t))

    def matrix(self, t: int) -> F2Matrix:
        """r x n matrix M_t with M_t x = h_t(x); column j is h_t(e_j)."""
        self.check_seed(t)
        with self._lock:
            cached = self._matrices.get(t)
        if cached is None:
            columns = [self._evaluate(1 << j, t) for j in range(self.n)]
            cached = F2Matrix.from_columns(columns, self.r)
            with self._lock:
                self._matrices[t] = cached
        return cached

    def hash_indices(self, xs: np.ndarray, t: int) -> np.ndarray:
        """Bucket index h_t(x) for every uint64 x, as int64."""
        if self.r > 62:
            raise UnsupportedParametersError(f"{self.r} output bits do not index an array")
        return self.matrix(t).apply(xs).astype(np.int64)

    def describe(self) -> str:
        return f"{self.backend}(n={self.n}, r={self.r}, D={self.D})"

    def __repr__(self) -> str:
        return self.describe()


def matrix(cond: LinearCondenser, t: int) -> F2Matrix:
    """Materialize h_t as an r x n matrix."""
    return cond.matrix(t)


class CertifiedRandomCondenser(LinearCondenser):
    """Explicit list of D random r x n matrices, optionally carrying its expansion certificate."""

    backend = "certified"

    def __init__(self, n: int, r: int, matrices: Sequence[F2Matrix],
                 certificate: Optional[ExpansionReport] = None):
        super().__init__(n, r, len(matrices))
        if r > n:
            raise UnsupportedParametersError(f"r={r} exceeds n={n}")
        for M in matrices:
            if M.n_rows != r or M.n_cols != n:
                raise DimensionMismatchError(
                    f"seed matrix is {M.n_rows}x{M.n_cols}, expected {r}x{n}")
        self.matrices = tuple(matrices)
        self._matrices = dict(enumerate(self.matrices))
        self.certificate = certificate

    def _evaluate(self, x: int, t: int) -> int:
        return mat_vec_mul(self.matrices[t], BitVec(self.n, x)).value


class LeftoverHashCondenser(LinearCondenser):
    """
    h_beta(x) = first r bits of beta * x in GF(2^n); seed t is the field element
    whose LSB-first bits are t, so D = 2^n.

    When (kappa, eps) are given the family must satisfy r >= kappa + 2 log2(1/eps).
    """

    backend = "lhl"

    def __init__(self, n: int, r: int, kappa: Optional[int] = None, eps: Optional[float] = None):
        super().__init__(n, r, 1 << n)
        if r > n:
            raise UnsupportedParametersError(f"r={r} exceeds n={n}")
        if (kappa is None) != (eps is None):
            raise ValueError("kappa and eps go together")
        if kappa is not None:
            needed = kappa + 2 * math.log2(1 / eps)
            if r < needed - 1e-9:
                raise UnsupportedParametersError(
                    f"leftover hash needs r >= kappa + 2 log2(1/eps) = {needed:.3f}, got r={r}")
        self.kappa = kappa
        self.eps = eps

    def _evaluate(self, x: int, t: int) -> int:
        return lhl_eval(self.n, self.r, BitVec(self.n, x), FieldElem(self.n, t)).value

    def hash_indices(self, xs: np.ndarray, t: int) -> np.ndarray:
        self.check_seed(t)
        product = gf_mul_array(xs, t, self.n)
        return (product & np.uint64((1 << self.r) - 1)).astype(np.int64)


def lhl_eval(n: int, r: int, x: BitVec, beta: FieldElem) -> BitVec:
    """
    First r bits of beta * x in GF(2^n).

    Args:
        n: field degree and input length
        r: output bits, <= n
        x: input vector
        beta: seed element of GF(2^n)

    Returns:
        Vector of length r
    """
    if r > n:
        raise UnsupportedParametersError(f"r={r} exceeds n={n}")
    if x.n != n or beta.m != n:
        raise DimensionMismatchError(f"expected length-{n} input and GF(2^{n}) seed")
    product = gf_mul(FieldElem(n, x.value), beta).value
    return BitVec(r, product & ((1 << r) - 1))


# =============================================================================
# GUV CONSTRUCTION
# =============================================================================

class GuvParams(BaseModel):
    """Parameters of the GUV linear condenser over F_q, q = 2^d."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: float = Field(..., gt=0)
    n: int = Field(..., ge=1)
    kappa: int = Field(..., ge=1)
    eps: float = Field(..., gt=0, lt=1)
    u: int = Field(..., ge=2, description="Power of 2")
    ell: int = Field(..., ge=1, description="Output blocks")
    q: int = Field(..., ge=2, description="Field size, power of 2")
    d: int = Field(..., ge=1, description="Seed bits, log2 q")
    r_bits: int = Field(..., ge=1, description="Output bits, ell * d")
    g: Poly = Field(..., description="Irreducible of degree n over F_q")

    @model_validator(mode="after")
    def _check_sizes(self) -> "GuvParams":
        if self.u & (self.u - 1) or self.q & (self.q - 1):
            raise ValueError("u and q must be powers of 2")
        if self.q != 1 << self.d or self.r_bits != self.ell * self.d:
            raise ValueError("inconsistent q/d/r_bits")
        if self.g.base_m != self.d or self.g.degree != self.n:
            raise ValueError("g must have degree n over F_q")
        return self

    @property
    def error_bound(self) -> float:
        """(n - 1)(u - 1) ell / q."""
        return (self.n - 1) * (self.u - 1) * self.ell / self.q


def _next_power_of_two(value: float) -> int:
    exponent = max(0, math.ceil(math.log2(value))) if value > 1 else 0
    while exponent > 0 and (1 << (exponent - 1)) >= value:
        exponent -= 1
    while (1 << exponent) < value:
        exponent += 1
    return 1 << exponent


def guv_sizes(alpha: float, n: int, kappa: int, eps: float) -> Tuple[int, int, int]:
    """
    (u, ell, q) for the GUV condenser.

    u0 = (8 n kappa / eps)^(1/alpha), u = next power of 2 (at least 2);
    ell = ceil(kappa / log2 u); q0 = n u ell / eps, q = next power of 2.
    """
    if not 0 < eps < 1 or alpha <= 0 or not 1 <= kappa <= n:
        raise ValueError("need 0 < eps < 1, alpha > 0 and 1 <= kappa <= n")
    u0 = (2 * 2 ** 2 * n * kappa / eps) ** (1 / alpha)
    u = max(2, _next_power_of_two(u0))
    log_u = u.bit_length() - 1
    ell = -(-kappa // log_u)
    q = _next_power_of_two(n * u * ell / eps)
    return u, ell, q


def guv_params(alpha: float, n: int, kappa: int, eps: float) -> GuvParams:
    """
    Parameters of an explicit linear (kappa, eps)-lossless condenser.

    Args:
        alpha: output-length exponent
        n: input bits
        kappa: min-entropy bits
        eps: condenser error

    Returns:
        GuvParams with g found by ``find_irreducible``
    """
    u, ell, q = guv_sizes(alpha, n, kappa, eps)
    d = q.bit_length() - 1
    if d > MAX_BITS:
        raise UnsupportedParametersError(f"field size 2^{d} exceeds 2^{MAX_BITS}")
    if ell * d > MAX_BITS:
        raise UnsupportedParametersError(f"{ell * d} output bits exceed {MAX_BITS}")
    logger.info("GUV sizes: u=%d ell=%d q=2^%d, searching modulus of degree %d", u, ell, d, n)
    params = GuvParams(alpha=alpha, n=n, kappa=kappa, eps=eps, u=u, ell=ell, q=q, d=d,
                       r_bits=ell * d, g=find_irreducible(n, d))
    assert params.error_bound <= eps, "error bound above eps"
    return params


def guv_eval(params: GuvParams, x: BitVec, t: int) -> BitVec:
    """
    Concatenated bits of F(z_t), F^u mod g (z_t), ..., F^(u^(ell-1)) mod g (z_t),
    where F has the bits of x as coefficients and z_t is the field element t.
    """
    if x.n != params.n:
        raise DimensionMismatchError(f"input of length {x.n}, condenser takes {params.n}")
    if not 0 <= t < params.q:
        raise DimensionMismatchError(f"seed {t} outside [0, {params.q})")
    F = Poly(params.d, x.bits())
    z = FieldElem(params.d, t)
    out = 0
    for i in range(params.ell):
        block = poly_eval(poly_mod_pow(F, params.u ** i, params.g), z)
        out |= block.value << (i * params.d)
    return BitVec(params.r_bits, out)


class GuvCondenser(LinearCondenser):
    """GUV condenser; D = q seeds, r = ell log2 q output bits (may exceed n)."""

    backend = "guv"

    def __init__(self, params: GuvParams):
        super().__init__(params.n, params.r_bits, params.q)
        self.params = params
        self._powers: Optional[List[List[Poly]]] = None

    def _evaluate(self, x: int, t: int) -> int:
        return guv_eval(self.params, BitVec(self.n, x), t).value

    def _basis_powers(self) -> List[List[Poly]]:
        # (x^j)^(u^i) mod g does not depend on the seed
        if self._powers is None:
            p = self.params
            self._powers = [
                [poly_mod_pow(Poly(p.d, (0,) * j + (1,)), p.u ** i, p.g) for i in range(p.ell)]
                for j in range(p.n)
            ]
        return self._powers

    def matrix(self, t: int) -> F2Matrix:
        self.check_seed(t)
        with self._lock:
            cached = self._matrices.get(t)
        if cached is None:
            p = self.params
            z = FieldElem(p.d, t)
            columns = []
            for powers in self._basis_powers():
                col = 0
                for i, P in enumerate(powers):
                    col |= poly_eval(P, z).value << (i * p.d)
                columns.append(col)
            cached = F2Matrix.from_columns(columns, self.r)
            with self._lock:
                self._matrices[t] = cached
        return cached


# =============================================================================
# VERIFIERS
# =============================================================================

def _distinct_counts(buckets: np.ndarray) -> np.ndarray:
    """buckets: (D, c, s) bucket ids -> (c,) total distinct neighbours over seeds."""
    ordered = np.sort(buckets, axis=-1)
    distinct = 1 + (np.diff(ordered, axis=-1) != 0).sum(axis=-1)
    return distinct.sum(axis=0)


def _sample_sets(rng: np.random.Generator, N: int, size: int, trials: int) -> np.ndarray:
    """trials x size array of distinct indices in [0, N)."""
    if N <= 4096:
        chunks = []
        for start in range(0, trials, 256):
            rows = min(256, trials - start)
            keys = rng.random((rows, N))
            chunks.append(np.argpartition(keys, size - 1, axis=1)[:, :size].astype(np.uint64))
        return np.concatenate(chunks)
    sets = rng.integers(0, N - 1, size=(trials, size), dtype=np.uint64, endpoint=True)
    for _ in range(1000):
        bad = (np.diff(np.sort(sets, axis=1), axis=1) == 0).any(axis=1)
        if not bad.any():
            return sets
        sets[bad] = rng.integers(0, N - 1, size=(int(bad.sum()), size),
                                 dtype=np.uint64, endpoint=True)
    raise RuntimeError("could not draw distinct index sets")


def _exhaustive_sets(N: int, size: int, chunk: int = 1 << 15):
    combos = itertools.combinations(range(N), size)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64).reshape(-1, size)


def verify_expansion(cond: LinearCondenser, k_max: int, eps: float, mode: str = "sampled",
                     trials: int = EXPANSION_TRIALS, budget: int = EXHAUSTIVE_BUDGET,
                     seed: int = 0) -> ExpansionReport:
    """
    Check |Gamma(S)| >= (1 - eps) D |S| for sets S with 1 <= |S| <= k_max, where
    Gamma(S) = {(h_t(i), t) : i in S, t in [D]}.

    Args:
        cond: condenser with an enumerable seed set
        k_max: largest set size
        eps: expansion error
        mode: 'exhaustive' (every set; needs sum C(2^n, s) <= budget) or
            'sampled' (``trials`` random sets per size, statistical only)
        trials: sets per size class in sampled mode
        budget: cap on sets enumerated in exhaustive mode
        seed: sampling randomness

    Returns:
        ExpansionReport with the worst ratio and a violating witness if any
    """
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if cond.D > MAX_VERIFIED_SEEDS:
        raise BudgetExceededError(f"{cond.D} seeds are too many to enumerate")
    N = 1 << cond.n
    sizes = [s for s in range(1, k_max + 1) if s <= N]
    seeds = range(cond.D)

    if mode == "exhaustive":
        total = sum(math.comb(N, s) for s in sizes)
        if total > budget:
            raise BudgetExceededError(
                f"exhaustive expansion check needs {total:,} sets, budget {budget:,}")
        table = np.stack([cond.hash_indices(np.arange(N, dtype=np.uint64), t) for t in seeds])

        def batches(size):
            for block in _exhaustive_sets(N, size):
                yield table[:, block], block
    else:
        rng = np.random.default_rng(seed)

        def batches(size):
            sets = _sample_sets(rng, N, size, trials)
            flat = sets.ravel()
            yield np.stack([cond.hash_indices(flat, t).reshape(sets.shape) for t in seeds]), sets

    worst_ratio = 1.0
    witness = None
    checked = 0
    for size in sizes:
        threshold = (1 - eps) * cond.D * size
        for buckets, members in batches(size):
            counts = _distinct_counts(buckets)
            checked += counts.shape[0]
            i = int(np.argmin(counts))
            ratio = counts[i] / (cond.D * size)
            if ratio < worst_ratio:
                worst_ratio = float(ratio)
                if counts[i] < threshold - 1e-9:
                    witness = sorted(int(v) for v in members[i])
    passed = witness is None
    logger.debug("expansion %s k_max=%d eps=%.4f: %d sets, worst ratio %.4f",
                 mode, k_max, eps, checked, worst_ratio)
    return ExpansionReport(k_max=k_max, eps=eps, mode=mode, sets_checked=checked,
                           worst_ratio=worst_ratio, witness=witness, passed=passed)


def verify_universality(cond: LeftoverHashCondenser,
                        max_n: int = UNIVERSALITY_MAX_N) -> UniversalityReport:
    """
    Exhaustive collision check Pr_t[h_t(x) = h_t(x')] <= 2^-r over all x != x'.

    By linearity h_t(x) = h_t(x') iff h_t(x + x') = 0, so every pair with the
    same difference has the same collision count; the table of h_t(delta) over
    all seeds and differences settles every pair.
    """
    if cond.n > max_n:
        raise BudgetExceededError(f"universality check enumerates pairs only for n <= {max_n}")
    N = 1 << cond.n
    deltas = np.arange(1, N, dtype=np.uint64)
    collisions = np.zeros(N - 1, dtype=np.int64)
    for t in range(cond.D):
        collisions += cond.hash_indices(deltas, t) == 0
    worst = int(np.argmax(collisions))
    max_prob = float(collisions[worst]) / cond.D
    bound = 2.0 ** -cond.r
    worst_delta = int(deltas[worst])
    return UniversalityReport(n=cond.n, r=cond.r, seeds=cond.D, pairs=N * (N - 1) // 2,
                              max_collision_prob=max_prob, bound=bound,
                              worst_pair=(0, worst_delta),
                              passed=max_prob <= bound + 1e-12)


# =============================================================================
# CONSTRUCTION HELPERS
# =============================================================================

def _full_rank_seeking(rng: np.random.Generator, r: int, n: int, attempts: int = 8) -> F2Matrix:
    M = F2Matrix.random(rng, r, n)
    for _ in range(attempts - 1):
        if rank(M) == min(r, n):
            break
        M = F2Matrix.random(rng, r, n)
    return M


def certified_random_family(n: int, r: int, D: int, k: int, eps: float, seed: int = 0,
                            mode: str = "sampled", trials: int = EXPANSION_TRIALS,
                            max_retries: int = CERTIFICATION_RETRIES,
                            budget: int = EXHAUSTIVE_BUDGET) -> CertifiedRandomCondenser:
    """
    Draw D random r x n matrices until the family passes ``verify_expansion``
    at (k, eps).

    Args:
        n: input bits
        r: output bits, with 2^r >= 4k
        D: seed count
        k: largest set size certified
        eps: expansion error
        seed: randomness; the same seed gives the same family
        mode: verifier mode
        trials: sets per size class when sampling
        max_retries: families drawn before giving up
        budget: exhaustive-mode cap

    Returns:
        CertifiedRandomCondenser carrying its ExpansionReport
    """
    if r > n:
        raise UnsupportedParametersError(f"r={r} exceeds n={n}")
    if (1 << r) < 4 * k:
        raise UnsupportedParametersError(
            f"2^r = {1 << r} < 4k = {4 * k}: no family with r={r} can be certified for k={k}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for attempt in range(1, max_retries + 1):
        matrices = [_full_rank_seeking(rng, r, n) for _ in range(D)]
        cond = CertifiedRandomCondenser(n, r, matrices)
        report = verify_expansion(cond, k, eps, mode=mode, trials=trials, budget=budget,
                                  seed=int(rng.integers(0, 2 ** 31)))
        if report.passed:
            cond.certificate = report
            logger.info("certified n=%d r=%d D=%d at (k=%d, eps=%.4f) on attempt %d, "
                        "worst ratio %.4f", n, r, D, k, eps, attempt, report.worst_ratio)
            return cond
        worst = max(worst, report.worst_ratio)
        logger.debug("attempt %d failed: worst ratio %.4f", attempt, report.worst_ratio)
    raise CertificationError(
        f"no family with n={n} r={r} D={D} passed expansion at k={k} eps={eps} "
        f"in {max_retries} attempts (best worst-ratio {worst:.4f})")


def build_recovery_condenser(n: int, k: int, config: Optional[CondenserConfig] = None
                             ) -> LinearCondenser:
    """
    Condenser for recovering k-sparse signals of length 2^n: lossless for sets of
    size 4k, with r = min(n, ceil(log2 4k) + r_margin) unless r is set.
    """
    config = config or CondenserConfig()
    kappa = max(1, math.ceil(math.log2(4 * k)))
    r = config.r if config.r is not None else min(n, kappa + config.r_margin)
    if config.backend == "certified":
        return certified_random_family(n, r, config.D, 4 * k, config.cert_eps, seed=config.seed,
                                       mode=config.cert_mode, trials=config.trials,
                                       max_retries=config.max_retries)
    if config.backend == "lhl":
        if r <= kappa:
            raise UnsupportedParametersError(f"leftover hash needs r > kappa = {kappa}, got r={r}")
        return LeftoverHashCondenser(n, r, kappa, 2.0 ** (-(r - kappa) / 2))
    params = guv_params(config.alpha, n, min(kappa, n), config.guv_eps)
    return GuvCondenser(params)
