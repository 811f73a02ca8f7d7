"""
Configuration for Sparse Walsh-Hadamard Recovery
=================================================
Defaults and pydantic models for condenser construction and recovery runs.
"""

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

# Analysis constant eps: drives the 3/eps + 8 error bound and the decay threshold
DEFAULT_EPS = 1 / 16
# Expansion error random families are certified at (at k_max = 4k)
DEFAULT_CERT_EPS = 1 / 4
DEFAULT_SEEDS = 8
DEFAULT_R_MARGIN = 3
EXPANSION_TRIALS = 2000
EXHAUSTIVE_BUDGET = 2_000_000
UNIVERSALITY_MAX_N = 10
CERTIFICATION_RETRIES = 20
MAX_PLAN_SIZE = 2 ** 24
# Extra iterations on top of log2(N L)
S0_SLACK = 2


def guarantee_constant(eps: float) -> float:
    """C = 1/eps gives the l1/l1 bound 3C + 8."""
    return 3.0 / eps + 8.0


class CondenserConfig(BaseModel):
    """How to build the condenser a recovery run uses."""
    model_config = ConfigDict(frozen=True)

    backend: Literal["certified", "lhl", "guv"] = Field(default="certified",
                                                       description="Condenser construction")
    D: int = Field(default=DEFAULT_SEEDS, ge=1, description="Seed count (certified only)")
    r: Optional[int] = Field(default=None, ge=0, le=64,
                             description="Output bits; None derives it from k")
    r_margin: int = Field(default=DEFAULT_R_MARGIN, ge=0,
                          description="Bits added to ceil(log2 4k) when r is derived")
    cert_eps: float = Field(default=DEFAULT_CERT_EPS, gt=0, lt=1,
                            description="Expansion error certified for random families")
    cert_mode: Literal["exhaustive", "sampled"] = Field(default="sampled")
    trials: int = Field(default=EXPANSION_TRIALS, ge=1,
                        description="Sampled subsets per size class")
    max_retries: int = Field(default=CERTIFICATION_RETRIES, ge=1)
    alpha: float = Field(default=1.0, gt=0, description="GUV output-length exponent")
    guv_eps: float = Field(default=1 / 4, gt=0, lt=1, description="GUV condenser error")
    seed: int = Field(default=0, ge=0, description="Randomness for random families")


class RecoveryConfig(BaseModel):
    """Parameters of one recovery run."""
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1, description="Target sparsity")
    eps: float = Field(default=DEFAULT_EPS, gt=0, lt=1, description="Condenser error in the analysis")
    s0: Optional[int] = Field(default=None, ge=1, description="Iterations; None = ceil(log2(N L)) + 2")
    L: int = Field(default=1, ge=1, description="Magnitude bound of the integer signal")
    mode: Literal["deterministic", "randomized"] = Field(default="deterministic")
    q: Optional[int] = Field(default=None, ge=1, description="Seeds sampled per step (randomized)")
    eta: float = Field(default=0.1, gt=0, lt=1, description="Failure probability (randomized)")
    nu: Optional[float] = Field(default=None, ge=0, description="Relative error floor; None = 1/(4 N L)")
    rng_seed: int = Field(default=0, ge=0)
    n_jobs: int = Field(default=1, description="Threads for per-seed work (joblib)")

    def resolved_s0(self, n: int) -> int:
        if self.s0 is not None:
            return self.s0
        return math.ceil(math.log2((1 << n) * self.L)) + S0_SLACK

    def resolved_q(self, s0: int) -> int:
        """Samples per step: ceil((4 / eps'^2) ln(3 s0 / eta)) with eps' = eps / 2."""
        if self.q is not None:
            return self.q
        eps_prime = self.eps / 2
        return math.ceil((4 / eps_prime ** 2) * math.log(3 * s0 / self.eta))

    def resolved_nu(self, n: int) -> float:
        if self.nu is not None:
            return self.nu
        return 1.0 / (4 * (1 << n) * self.L)
