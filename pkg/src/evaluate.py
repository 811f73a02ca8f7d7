"""
Evaluation Module for Sparse Recovery
=====================================
l1 metrics, the l1/l1 guarantee check and the JSON run report.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from src.condenser import LinearCondenser
from src.config import RecoveryConfig, guarantee_constant
from src.recover import RecoveryResult
from src.sketch import SparseVec, sparse_matvec
from src.wht import DenseSignal


def _dense(x: Union[DenseSignal, SparseVec, np.ndarray]) -> np.ndarray:
    if isinstance(x, DenseSignal):
        return x.values
    if isinstance(x, SparseVec):
        return x.to_dense()
    return np.asarray(x)


def tail_l1(x, k: int) -> float:
    """||x - H_k(x)||_1: everything but the k largest magnitudes."""
    mags = np.sort(np.abs(_dense(x)).astype(np.float64))
    return float(mags[: max(0, mags.size - k)].sum())


def l1_error(estimate, x) -> float:
    return float(np.abs(_dense(estimate).astype(np.float64) - _dense(x)).sum())


def check_guarantee(error: float, tail: float, eps: float, floor: float = 0.0) -> bool:
    """
    error <= (3/eps + 8) tail + floor; with no tail and no floor recovery must be exact.
    """
    if tail == 0 and floor == 0:
        return error == 0
    return error <= guarantee_constant(eps) * tail + floor + 1e-9


def calculate_metrics(estimate, x, k: int, eps: float, floor: float = 0.0) -> Dict[str, Any]:
    """Calculate all evaluation metrics."""
    error = l1_error(estimate, x)
    tail = tail_l1(x, k)
    return {
        'l1_error': error,
        'l1_tail': tail,
        'ratio': error / tail if tail > 0 else None,
        'exact': error == 0,
        'bound': guarantee_constant(eps),
        'within_guarantee': check_guarantee(error, tail, eps, floor),
    }


def decay_violations(history: List[SparseVec], x, k: int, eps: float) -> List[Tuple[int, float, float]]:
    """
    Steps where ||x - x^s||_1 > (1/eps) tail but ||x - x^{s+1}||_1 > half of it.

    Returns:
        (s, error at s, error at s+1) for every violating step
    """
    tail = tail_l1(x, k)
    errors = [l1_error(x_s, x) for x_s in history]
    return [(s, errors[s], errors[s + 1]) for s in range(len(errors) - 1)
            if errors[s] > tail / eps and errors[s + 1] > errors[s] / 2]


def rip1_ratio(cond: LinearCondenser, w: SparseVec) -> float:
    """||M w||_1 / (D ||w||_1) over all seeds; lies in [1 - 2 eps, 1] on good expanders."""
    total = sum(np.abs(sparse_matvec(cond, t, w, False)).sum() for t in range(cond.D))
    return float(total) / (cond.D * w.l1_norm())


# =============================================================================
# REPORTS
# =============================================================================

class RecoveryReport(BaseModel):
    """Fixed-schema summary of one recovery run."""
    n: int
    k: int
    mode: str
    condenser: str
    queries: int
    seeds_touched: int
    iterations: int
    l1_error: float
    l1_tail: float
    ratio: Optional[float] = Field(..., description="l1_error / l1_tail, null without a tail")
    exact: bool
    wall_ms: float


class RunReport(RecoveryReport):
    """Recovery report plus the command line and the configuration that produced it."""
    command: str
    config: Dict[str, Any]


def build_report(result: RecoveryResult, x, cond: LinearCondenser,
                 config: RecoveryConfig) -> RecoveryReport:
    metrics = calculate_metrics(result.estimate, x, config.k, config.eps)
    return RecoveryReport(
        n=cond.n, k=config.k, mode=config.mode, condenser=cond.describe(),
        queries=result.queries, seeds_touched=result.seeds_touched,
        iterations=result.iterations, l1_error=metrics['l1_error'],
        l1_tail=metrics['l1_tail'], ratio=metrics['ratio'], exact=metrics['exact'],
        wall_ms=round(result.wall_ms, 3),
    )


def save_report(report: BaseModel, save_path: Union[str, Path]):
    """Write a report as indented JSON, fields in declaration order."""
    save_path = Path(save_path)
    save_path.parent.mkdir(parents=True, exist_ok=True)
    with open(save_path, 'w') as f:
        json.dump(report.model_dump(mode="json"), f, indent=2)
    print(f"  ✓ Saved: {save_path}")
