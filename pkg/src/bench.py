"""
Scaling Benchmarks
==================
Sweeps n, k or D for deterministic recovery and tabulates spectral query counts
against the closed-form plan size, wall time and the achieved l1 ratio.
"""

import logging
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.condenser import build_recovery_condenser
from src.config import CondenserConfig, RecoveryConfig
from src.evaluate import calculate_metrics
from src.recover import end_to_end
from src.signals import generate_signal
from src.sketch import QueryPlan
from src.wht import oracle_from_signal

logger = logging.getLogger(__name__)

SWEEPS = ("n", "k", "D")


def bench_point(n: int, k: int, D: int, trials: int = 3, mag_max: int = 10,
                noise_l1: float = 0.0, seed: int = 0,
                condenser: Optional[CondenserConfig] = None) -> dict:
    """
    One sweep point: certify a condenser once, then time ``trials`` identical runs.

    Returns:
        Row with counts (identical across trials) and wall-time mean/std
    """
    base = condenser or CondenserConfig()
    cond = build_recovery_condenser(n, k, base.model_copy(update={"D": D, "seed": seed}))
    model = "noisy" if noise_l1 > 0 else "exact"
    signal = generate_signal(n, k, model=model, noise_l1=noise_l1, mag_max=mag_max, seed=seed)
    config = RecoveryConfig(k=k, L=max(mag_max, int(np.abs(signal.values).max())))

    walls, counts = [], set()
    metrics = None
    for _ in range(trials):
        result = end_to_end(oracle_from_signal(signal), cond, config)
        walls.append(result.wall_ms)
        counts.add((result.queries, result.plan_size, result.seeds_touched))
        metrics = calculate_metrics(result.estimate, signal, k, config.eps)
    if len(counts) != 1:
        logger.warning("query counts differ across trials at n=%d k=%d D=%d: %s", n, k, D, counts)
    queries, plan_size, seeds = sorted(counts)[0]
    bound = QueryPlan.bound(n, cond.r, cond.D)
    return {
        'n': n, 'k': k, 'D': cond.D, 'r': cond.r,
        'queries': queries,
        'plan_size': plan_size,
        'plan_bound': bound,
        'queries_match_plan': queries == plan_size and plan_size <= bound,
        'below_N': queries < (1 << n),
        'seeds': seeds,
        'wall_ms': float(np.mean(walls)),
        'wall_ms_std': float(np.std(walls)),
        'ratio': metrics['ratio'],
        'exact': metrics['exact'],
    }


def run_bench(sweep: str, start: int, stop: int, step: int = 1, n: int = 12, k: int = 4,
              D: int = 8, trials: int = 3, mag_max: int = 10, noise_l1: float = 0.0,
              seed: int = 0, condenser: Optional[CondenserConfig] = None) -> pd.DataFrame:
    """
    Sweep one parameter from ``start`` to ``stop`` (inclusive) with the others fixed.

    Returns:
        DataFrame with one row per sweep point
    """
    if sweep not in SWEEPS:
        raise ValueError(f"sweep must be one of {SWEEPS}, got {sweep!r}")
    if step < 1 or stop < start:
        raise ValueError("need start <= stop and step >= 1")
    rows = []
    for value in tqdm(range(start, stop + 1, step), desc=f"Sweep {sweep}"):
        params = {'n': n, 'k': k, 'D': D}
        params[sweep] = value
        rows.append(bench_point(params['n'], params['k'], params['D'], trials=trials,
                                mag_max=mag_max, noise_l1=noise_l1, seed=seed,
                                condenser=condenser))
    return pd.DataFrame(rows)
