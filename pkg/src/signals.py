"""
Synthetic Signal Generation
===========================
k-sparse integer signals, optionally with an integer tail of fixed l1 mass.
"""

import numpy as np

from src.wht import DenseSignal


def generate_signal(n: int, k: int, model: str = "exact", noise_l1: float = 0.0,
                    mag_max: int = 10, seed: int = 0) -> DenseSignal:
    """
    Random integer signal of length 2^n.

    The head has k uniform support positions, magnitudes uniform in [1, mag_max]
    and random signs. The noisy model adds a tail of l1 mass floor(noise_l1)
    on coordinates outside the head, one sign per coordinate so no mass cancels.

    Args:
        n: log2 of the length
        k: head sparsity
        model: 'exact' or 'noisy'
        noise_l1: tail mass for the noisy model
        mag_max: largest head magnitude
        seed: randomness

    Returns:
        DenseSignal with int64 values
    """
    if model not in ("exact", "noisy"):
        raise ValueError(f"unknown model {model!r}")
    N = 1 << n
    if not 0 <= k <= N:
        raise ValueError(f"k={k} outside 0..{N}")
    if mag_max < 1:
        raise ValueError("mag_max must be >= 1")
    rng = np.random.default_rng(seed)
    values = np.zeros(N, dtype=np.int64)
    support = rng.choice(N, size=k, replace=False)
    magnitudes = rng.integers(1, mag_max, size=k, endpoint=True)
    signs = rng.choice(np.array([-1, 1]), size=k)
    values[support] = signs * magnitudes

    mass = int(np.floor(noise_l1)) if model == "noisy" else 0
    if mass > 0:
        free = np.setdiff1d(np.arange(N), support)
        if free.size == 0:
            raise ValueError("no room for a tail outside the head")
        spots = rng.choice(free, size=min(mass, free.size), replace=False)
        counts = 1 + rng.multinomial(mass - spots.size, np.full(spots.size, 1 / spots.size))
        values[spots] = rng.choice(np.array([-1, 1]), size=spots.size) * counts
    return DenseSignal(n, values)
