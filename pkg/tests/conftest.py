"""
Shared fixtures: seeded generators, certified condensers and a direct
(matrix-product) sketch to compare the spectral path against.
"""

import numpy as np
import pytest

from src.condenser import build_recovery_condenser, certified_random_family
from src.config import CondenserConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_family():
    """n=6, r=4, D=8 family certified exhaustively at (k=2, eps=1/4)."""
    return certified_random_family(6, 4, 8, 2, 0.25, seed=7, mode="exhaustive")


@pytest.fixture(scope="session")
def cond_8_2():
    """Recovery condenser for n=8, k=2 (r=6, D=8)."""
    return build_recovery_condenser(8, 2, CondenserConfig(seed=11))


@pytest.fixture(scope="session")
def cond_10_4():
    """Recovery condenser for n=10, k=4 (r=7, D=8)."""
    return build_recovery_condenser(10, 4, CondenserConfig(seed=5))


@pytest.fixture(scope="session")
def lhl_8_2():
    """Leftover-hash condenser for n=8, k=2 (r=6, D=256)."""
    return build_recovery_condenser(8, 2, CondenserConfig(backend="lhl"))


def _direct_sketch(cond, values):
    N = 1 << cond.n
    idx = np.arange(N, dtype=np.uint64)
    positions = np.arange(N)
    out = np.zeros((cond.n + 1, cond.D, 1 << cond.r), dtype=np.asarray(values).dtype)
    for t in range(cond.D):
        buckets = cond.hash_indices(idx, t)
        np.add.at(out[0, t], buckets, values)
        for b in range(1, cond.n + 1):
            bit = (positions >> (b - 1)) & 1
            np.add.at(out[b, t], buckets, values * bit)
    return out


@pytest.fixture
def direct_sketch():
    """y = (M x, (M (x) B) x) by scattering every coordinate of x."""
    return _direct_sketch
